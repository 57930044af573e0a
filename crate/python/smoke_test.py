"""Smoke test for the compiled extension: python3 python/smoke_test.py"""

import math

import scaled_uniform_py as su

stat = su.SuffStat.from_sample([0.9, 1.2, 1.0], k=0.5)
lo, hi = stat.sure_interval()
assert math.isclose(lo, 0.8) and math.isclose(hi, 1.8)
assert stat.n == 3 and math.isclose(stat.s2, 0.75)

est = dict(stat.estimates())
assert set(su.catalog()) == set(est)
assert math.isclose(est["rb"], 1.05, rel_tol=1e-12)
assert math.isclose(est["gm"], 1.0125297383029342, rel_tol=1e-12)
assert math.isclose(est["opt"], stat.estimate("bayes:3"), rel_tol=1e-12)
assert math.isclose(est["sc"], stat.point_estimate("log_squared"), rel_tol=1e-12)

fid = stat.fiducial()
assert (fid.alpha, fid.a, fid.b) == (3.0, lo, hi)
assert math.isclose(fid.median(), 0.980057220258694, rel_tol=1e-12)
assert math.isclose(math.exp(fid.log_moment()), est["sc"], rel_tol=1e-12)
a, b = stat.confidence_interval(0.1)
assert math.isclose(fid.cdf(a), 0.05) and math.isclose(fid.cdf(b), 0.95)

design = su.Design(0.5, 5)
q = su.quad_risk("opt", design)
mc = su.mc_risks(["opt", "rb"], design, reps=200_000, seed=7)
assert abs(mc[0]["value"] - q["value"]) < 4 * mc[0]["stderr"]
assert mc[0]["value"] < mc[1]["value"]
assert su.mc_risks(["opt"], design, seed=3, workers=1) == su.mc_risks(["opt"], design, seed=3, workers=4)

for row in su.coverage([0.1, 0.5], design, reps=100_000, seed=2):
    assert abs(row["coverage"] - (1 - row["gamma"])) < 4 * row["stderr"]

try:
    su.SuffStat.from_sample([1.0, 3.1], k=0.5)
except su.InfeasibleError as err:
    assert "y_max/(1+k)" in str(err)
else:
    raise AssertionError("infeasible data accepted")
try:
    stat.estimate("nope")
except KeyError:
    pass
else:
    raise AssertionError("unknown estimator accepted")

print("smoke test passed")
