//! Point estimators of the scale `θ`, all functions of the sufficient statistic.

use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::fiducial::fiducial_dist;
use crate::model::{Design, SuffStat};
use crate::pareto::TruncPareto;

type Rule = Arc<dyn Fn(&SuffStat) -> Result<f64> + Send + Sync>;

/// A named estimation rule `SuffStat -> θ̂`.
#[derive(Clone)]
pub struct Estimator {
    name: String,
    rule: Rule,
    feasible_by_construction: bool,
}

impl Estimator {
    pub fn new<F>(name: impl Into<String>, feasible_by_construction: bool, rule: F) -> Self
    where
        F: Fn(&SuffStat) -> Result<f64> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            rule: Arc::new(rule),
            feasible_by_construction,
        }
    }

    fn infallible(name: &str, feasible: bool, rule: fn(&SuffStat) -> f64) -> Self {
        Self::new(name, feasible, move |s| Ok(rule(s)))
    }

    /// Posterior mean under the prior `θ^{-p}`, named `bayes:<p>`.
    pub fn bayes(p: f64) -> Result<Self> {
        if !p.is_finite() {
            return Err(domain("p", p, "prior exponent must be finite"));
        }
        Ok(Self::new(format!("bayes:{p}"), true, move |s| bayes_p(s, p)))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Whether every estimate is guaranteed to land in the sure interval.
    pub fn feasible_by_construction(&self) -> bool {
        self.feasible_by_construction
    }

    pub fn estimate(&self, s: &SuffStat) -> Result<f64> {
        (self.rule)(s)
    }
}

impl fmt::Debug for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Estimator")
            .field("name", &self.name)
            .field("feasible_by_construction", &self.feasible_by_construction)
            .finish_non_exhaustive()
    }
}

/// Maximum likelihood: the lower end of the sure interval.
pub fn mle(s: &SuffStat) -> f64 {
    s.theta_ml()
}

/// Mode of the fiducial density, which is strictly decreasing on the sure
/// interval, so this coincides with [`mle`].
pub fn map(s: &SuffStat) -> f64 {
    fiducial_dist(s).dist().a()
}

/// Midpoint of the extremes, `E(Y_1 | S)`.
pub fn rao_blackwell(s: &SuffStat) -> f64 {
    0.5 * (s.y_min() + s.y_max())
}

/// Coefficients `(c⁻, c⁺)` of the best linear unbiased combination of the extremes.
pub fn linear_unbiased_coefficients(design: Design) -> (f64, f64) {
    let n = design.n() as f64;
    let k = design.k();
    let denom = 1.0 + k * k * (n - 1.0) / (n + 1.0);
    (0.5 * (1.0 - k) / denom, 0.5 * (1.0 + k) / denom)
}

/// `c⁻ y_min + c⁺ y_max`. Unbiased, but may leave the sure interval.
pub fn linear_unbiased(s: &SuffStat) -> f64 {
    let (lo, hi) = linear_unbiased_coefficients(s.design());
    lo * s.y_min() + hi * s.y_max()
}

/// Posterior under the prior `θ^{-p}`: `Pareto(n + p - 1, [theta_ml, theta_mu])`.
pub fn posterior(s: &SuffStat, p: f64) -> Result<TruncPareto> {
    let alpha = s.n() as f64 + p - 1.0;
    if alpha == 0.0 {
        return Err(domain(
            "p",
            p,
            "posterior index n + p - 1 vanishes; pick another prior exponent",
        ));
    }
    TruncPareto::new(alpha, s.theta_ml(), s.theta_mu())
}

/// Posterior mean under the prior `θ^{-p}`.
pub fn bayes_p(s: &SuffStat, p: f64) -> Result<f64> {
    Ok(posterior(s, p)?.mean())
}

/// Prior `θ^{-2}`; unbiased.
pub fn gm(s: &SuffStat) -> f64 {
    bayes_p(s, 2.0).expect("index n + 1 is positive")
}

/// Fiducial mean, the optimum under squared error.
pub fn gt(s: &SuffStat) -> f64 {
    fiducial_dist(s).dist().mean()
}

/// Minimizer of the fiducial risk `E(1 - θ̂/Θ)²`: `E(Θ⁻¹) / E(Θ⁻²)`.
pub fn opt(s: &SuffStat) -> f64 {
    let fid = fiducial_dist(s);
    let d = fid.dist();
    d.moment(-1.0) / d.moment(-2.0)
}

/// Minimizer of the fiducial risk `E(ln Θ - ln θ̂)²`: `exp E(ln Θ)`.
pub fn sc(s: &SuffStat) -> f64 {
    fiducial_dist(s).dist().log_moment().exp()
}

/// Conditional law of the standardized maximum `U_(n)` given `U_(1)/U_(n) = s2`:
/// `Pareto(-n, [(1-k)/s2, 1+k])`.
pub fn conditional_max_law(s2: f64, design: Design) -> Result<TruncPareto> {
    let lo_ratio = design.lower() / design.upper();
    if !(s2 <= 1.0 && s2 >= lo_ratio * (1.0 - 1e-12)) {
        return Err(domain(
            "s2",
            s2,
            "ancillary ratio must lie in [(1-k)/(1+k), 1]",
        ));
    }
    let a = (design.lower() / s2).min(design.upper());
    TruncPareto::new(-(design.n() as f64), a, design.upper())
}

/// `φ(s2) = 1 / E(U_(n) | S_2 = s2)`, so that `φ(S_2)·Y_(n)` is conditionally unbiased.
pub fn unbias_factor(s2: f64, design: Design) -> Result<f64> {
    Ok(1.0 / conditional_max_law(s2, design)?.mean())
}

/// The conditionally unbiased estimator `φ(s2)·y_max`.
pub fn conditional_unbiased(s: &SuffStat) -> Result<f64> {
    Ok(unbias_factor(s.s2(), s.design())? * s.y_max())
}

/// Every named rule. Names double as CLI identifiers.
pub fn catalog() -> Vec<Estimator> {
    vec![
        Estimator::infallible("mle", true, mle),
        Estimator::infallible("map", true, map),
        Estimator::infallible("rb", true, rao_blackwell),
        Estimator::infallible("lv", false, linear_unbiased),
        Estimator::infallible("gt", true, gt),
        Estimator::infallible("gm", true, gm),
        Estimator::infallible("opt", true, opt),
        Estimator::infallible("sc", true, sc),
    ]
}

/// Finds a catalog rule by name, or builds `bayes:<p>`.
pub fn lookup(name: &str) -> Result<Estimator> {
    let canonical = match name {
        "rao_blackwell" => "rb",
        "linear_unbiased" => "lv",
        other => other,
    };
    if let Some(p) = canonical.strip_prefix("bayes:") {
        return match p.parse::<f64>() {
            Ok(p) => Estimator::bayes(p),
            Err(_) => Err(unknown(name)),
        };
    }
    catalog()
        .into_iter()
        .find(|e| e.name() == canonical)
        .ok_or_else(|| unknown(name))
}

fn unknown(name: &str) -> Error {
    let mut available: Vec<String> = catalog().iter().map(|e| e.name().to_string()).collect();
    available.push("bayes:<p>".into());
    Error::UnknownEstimator {
        name: name.to_string(),
        available: available.join(", "),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Sample;

    fn example() -> SuffStat {
        let d = Design::new(0.5, 3).unwrap();
        SuffStat::from_sample(&Sample::new(d, vec![0.9, 1.2, 1.0]).unwrap()).unwrap()
    }

    /// Support collapses to a point: y_min = θ(1-k), y_max = θ(1+k).
    fn point_interval() -> SuffStat {
        SuffStat::from_extremes(0.5, 1.5, Design::new(0.5, 3).unwrap()).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn example_values() {
        let s = example();
        assert!(rel(mle(&s), 0.8) < 1e-15);
        assert!(rel(rao_blackwell(&s), 1.05) < 1e-15);
        assert!(rel(linear_unbiased(&s), 1.0) < 1e-15);
        let b: f64 = 2.25;
        let gm_closed = (4.0 / 3.0) * (1.0 - b.powi(-3)) / (1.0 - b.powi(-4)) * 0.8;
        assert!(rel(gm(&s), gm_closed) < 1e-14);
        assert!((gm(&s) - 1.01253).abs() < 5e-6);
        let opt_closed = (5.0 / 4.0) * (1.0 - b.powi(-4)) / (1.0 - b.powi(-5)) * 0.8;
        assert!(rel(opt(&s), opt_closed) < 1e-14);
        assert!((opt(&s) - 0.977941).abs() < 5e-7);
        let sc_closed = 0.8 * (1.0 / 3.0 - b.ln() / (b.powi(3) - 1.0)).exp();
        assert!(rel(sc(&s), sc_closed) < 1e-14);
        assert!((sc(&s) - 1.03267).abs() < 5e-6);
    }

    #[test]
    fn linear_coefficients() {
        let (lo, hi) = linear_unbiased_coefficients(Design::new(0.5, 3).unwrap());
        assert!(rel(lo, 2.0 / 9.0) < 1e-15);
        assert!(rel(hi, 2.0 / 3.0) < 1e-15);
        let (lo, hi) = linear_unbiased_coefficients(Design::new(0.3, 1).unwrap());
        assert!(rel(lo + hi, 1.0) < 1e-15);
        let (lo, hi) = linear_unbiased_coefficients(Design::new(1e-9, 10).unwrap());
        assert!((lo - 0.5).abs() < 1e-8 && (hi - 0.5).abs() < 1e-8);
    }

    #[test]
    fn single_observation() {
        let s = SuffStat::from_extremes(1.3, 1.3, Design::new(0.4, 1).unwrap()).unwrap();
        assert!(rel(linear_unbiased(&s), 1.3) < 1e-15);
        assert!(s.b_star() > 1.0);
        for e in catalog() {
            assert!(e.estimate(&s).unwrap().is_finite());
        }
    }

    #[test]
    fn point_interval_collapses_every_rule() {
        let s = point_interval();
        assert_eq!(s.b_star(), 1.0);
        for e in catalog().iter().filter(|e| e.feasible_by_construction()) {
            let v = e.estimate(&s).unwrap();
            assert!(rel(v, 1.0) < 1e-14, "{} -> {v}", e.name());
        }
        // the linear rule does not collapse: it lands at (1+k²)/(1+k²(n-1)/(n+1))
        assert!(rel(linear_unbiased(&s), 1.25 / 1.125) < 1e-14);
        assert!(rel(bayes_p(&s, 7.5).unwrap(), 1.0) < 1e-14);
        assert!(rel(conditional_unbiased(&s).unwrap(), 1.0) < 1e-14);
    }

    #[test]
    fn bayes_p_index_one_uses_log_branch() {
        // n = 2, p = 0 gives α = 1
        let s = SuffStat::from_extremes(0.9, 1.2, Design::new(0.5, 2).unwrap()).unwrap();
        let (a, b) = (s.theta_ml(), s.theta_mu());
        let expected = (b / a).ln() / (1.0 / a - 1.0 / b);
        assert!(rel(bayes_p(&s, 0.0).unwrap(), expected) < 1e-14);
        // α = 0 is rejected
        assert!(bayes_p(&s, -1.0).is_err());
    }

    #[test]
    fn identity_chain_on_example() {
        let s = example();
        assert!(rel(opt(&s), bayes_p(&s, 3.0).unwrap()) < 1e-13);
        assert!(rel(gt(&s), bayes_p(&s, 1.0).unwrap()) < 1e-15);
        assert!(rel(conditional_unbiased(&s).unwrap(), gm(&s)) < 1e-13);
        assert_eq!(map(&s), mle(&s));
    }

    #[test]
    fn unbias_factor_range() {
        let d = Design::new(0.5, 3).unwrap();
        assert!(unbias_factor(0.2, d).is_err());
        assert!(unbias_factor(1.1, d).is_err());
        let phi = unbias_factor(1.0, d).unwrap();
        // s2 = 1: V ~ Pareto(-3, [0.5, 1.5])
        let v = TruncPareto::new(-3.0, 0.5, 1.5).unwrap();
        assert!(rel(phi, 1.0 / v.mean()) < 1e-15);
    }

    #[test]
    fn linear_unbiased_can_leave_sure_interval() {
        // extremes near both support edges: the sure interval is tiny and
        // θ_LV ≈ θ(1+k²)/(1 + k²(n-1)/(n+1)) overshoots it
        let d = Design::new(0.9, 10).unwrap();
        let s = SuffStat::from_extremes(0.1001, 1.9, d).unwrap();
        let v = linear_unbiased(&s);
        assert!(!s.contains(v), "witness {v} in [{}, {}]", s.theta_ml(), s.theta_mu());
    }

    #[test]
    fn lookup_names() {
        assert_eq!(lookup("rao_blackwell").unwrap().name(), "rb");
        assert_eq!(lookup("bayes:2.5").unwrap().name(), "bayes:2.5");
        assert!(lookup("bayes:x").is_err());
        let err = lookup("median").unwrap_err().to_string();
        assert!(err.contains("opt") && err.contains("bayes:<p>"));
        assert!(catalog().len() >= 7);
    }
}
