//! Frequentist evaluation: Monte Carlo and quadrature risk, bias, dominance
//! tables, interval coverage and equivariance audits.
//!
//! Quadrature works at `θ = 1` on the joint law of the standardized extremes
//! `(U_(1), U_(n))`. With `a = (U_(1) - (1-k))/2k` and `c = ((1+k) - U_(n))/2k`
//! the pair has density `n(n-1)(1-a-c)^{n-2}` on the simplex `a + c <= 1`.
//! Writing `a = t·v`, `c = t·(1-v)` maps the simplex onto the unit square with
//! density `n(n-1)·t·(1-t)^{n-2}`: `t` is Beta(2, n-1) and `v` is uniform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::estimators::Estimator;
use crate::fiducial::{confidence_interval, fiducial_dist, LossKind};
use crate::model::{sample_suff_stat, Design, SuffStat};
use crate::parallel::{default_workers, run_blocks};
use crate::quad::{self, QuadResult, Tolerance};
use crate::stats::{binomial_stderr, ks_pvalue, ks_statistic, pairwise_reduce, Moments};

/// Tolerance for all risk and bias integrals.
pub const QUAD_TOLERANCE: Tolerance = Tolerance::new(1e-13, 1e-12);

/// Smallest replication count accepted by the Monte Carlo routines.
pub const MIN_REPS: u64 = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Mc,
    Quad,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Mc => "mc",
            Method::Quad => "quad",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub estimator: String,
    pub n: usize,
    pub k: f64,
    pub theta: f64,
    pub loss: LossKind,
    pub method: Method,
    pub value: f64,
    /// Monte Carlo standard error, or the quadrature error estimate.
    pub stderr: f64,
    pub reps: Option<u64>,
    pub seed: Option<u64>,
}

impl RiskReport {
    /// Transfers a risk computed at one `θ` to another through the loss scaling law.
    pub fn at_theta(&self, theta: f64) -> Result<RiskReport> {
        let power = self.loss.scale_exponent().ok_or_else(|| {
            Error::Unsupported("the dirac loss has no frequentist risk".into())
        })?;
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(domain("theta", theta, "scale parameter must be positive"));
        }
        let factor = (theta / self.theta).powi(power);
        Ok(RiskReport {
            theta,
            value: self.value * factor,
            stderr: self.stderr * factor,
            ..self.clone()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub gamma: f64,
    pub theta: f64,
    pub n: usize,
    pub k: f64,
    pub reps: u64,
    pub hits: u64,
    pub coverage: f64,
    pub stderr: f64,
    pub seed: u64,
}

/// Monte Carlo settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McOptions {
    pub reps: u64,
    pub seed: u64,
    pub workers: usize,
}

impl McOptions {
    pub fn new(reps: u64, seed: u64) -> Self {
        Self {
            reps,
            seed,
            workers: default_workers(),
        }
    }

    pub fn with_workers(self, workers: usize) -> Self {
        Self { workers, ..self }
    }

    fn check(&self) -> Result<()> {
        if self.reps < MIN_REPS {
            return Err(domain(
                "reps",
                self.reps as f64,
                "Monte Carlo needs at least 1000 replications",
            ));
        }
        Ok(())
    }
}

fn risk_loss(loss: LossKind) -> Result<LossKind> {
    match loss {
        LossKind::Dirac => Err(domain(
            "loss",
            f64::NAN,
            "the dirac loss has no frequentist risk estimate",
        )),
        other => Ok(other),
    }
}

/// Losses of several estimators on shared samples, with paired differences.
#[derive(Debug, Clone, PartialEq)]
pub struct McRiskTable {
    pub risks: Vec<RiskReport>,
    /// `diffs[i][j]` for `i < j`: moments of `loss_i - loss_j`.
    diffs: Vec<Vec<Moments>>,
}

impl McRiskTable {
    /// Moments of the per-replication difference `loss_i - loss_j`.
    pub fn paired_difference(&self, i: usize, j: usize) -> (f64, f64) {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => {
                let m = self.diffs[i][j - i - 1];
                (m.mean(), m.stderr())
            }
            std::cmp::Ordering::Greater => {
                let (mean, se) = self.paired_difference(j, i);
                (-mean, se)
            }
            std::cmp::Ordering::Equal => (0.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, Default)]
struct BlockAcc {
    per: Vec<Moments>,
    diffs: Vec<Vec<Moments>>,
}

impl BlockAcc {
    fn new(m: usize) -> Self {
        Self {
            per: vec![Moments::default(); m],
            diffs: (0..m).map(|i| vec![Moments::default(); m - i - 1]).collect(),
        }
    }

    fn merge(&self, other: &Self) -> Self {
        Self {
            per: self.per.iter().zip(&other.per).map(|(a, b)| a.merge(b)).collect(),
            diffs: self
                .diffs
                .iter()
                .zip(&other.diffs)
                .map(|(ra, rb)| ra.iter().zip(rb).map(|(a, b)| a.merge(b)).collect())
                .collect(),
        }
    }
}

/// Monte Carlo risk of several estimators with common random numbers.
pub fn mc_risks(
    estimators: &[Estimator],
    theta: f64,
    design: Design,
    loss: LossKind,
    opts: McOptions,
) -> Result<McRiskTable> {
    opts.check()?;
    let loss = risk_loss(loss)?;
    let m = estimators.len();
    let blocks = run_blocks(opts.reps, opts.seed, opts.workers, |rng, len| {
        let mut acc = BlockAcc::new(m);
        let mut losses = vec![0.0; m];
        for _ in 0..len {
            let s = sample_suff_stat(theta, design, rng)?;
            for (slot, e) in losses.iter_mut().zip(estimators) {
                *slot = loss.eval(theta, e.estimate(&s)?)?;
            }
            for i in 0..m {
                acc.per[i].push(losses[i]);
                for j in i + 1..m {
                    acc.diffs[i][j - i - 1].push(losses[i] - losses[j]);
                }
            }
        }
        Ok::<_, Error>(acc)
    });
    let blocks: Vec<BlockAcc> = blocks.into_iter().collect::<Result<_>>()?;
    let total = pairwise_reduce(&blocks, &BlockAcc::merge).unwrap_or_else(|| BlockAcc::new(m));
    let risks = estimators
        .iter()
        .zip(&total.per)
        .map(|(e, mo)| RiskReport {
            estimator: e.name().to_string(),
            n: design.n(),
            k: design.k(),
            theta,
            loss,
            method: Method::Mc,
            value: mo.mean(),
            stderr: mo.stderr(),
            reps: Some(opts.reps),
            seed: Some(opts.seed),
        })
        .collect();
    Ok(McRiskTable {
        risks,
        diffs: total.diffs,
    })
}

/// Monte Carlo estimate of `E_θ L(θ, ψ(S))`.
pub fn mc_risk(
    estimator: &Estimator,
    theta: f64,
    design: Design,
    loss: LossKind,
    reps: u64,
    seed: u64,
) -> Result<RiskReport> {
    mc_risk_with(estimator, theta, design, loss, McOptions::new(reps, seed))
}

pub fn mc_risk_with(
    estimator: &Estimator,
    theta: f64,
    design: Design,
    loss: LossKind,
    opts: McOptions,
) -> Result<RiskReport> {
    let table = mc_risks(std::slice::from_ref(estimator), theta, design, loss, opts)?;
    Ok(table.risks.into_iter().next().expect("one estimator"))
}

/// Break points for the Beta(2, n-1) weight in `t`, which peaks at `1/(n-1)`.
fn t_breaks(n: usize) -> Vec<f64> {
    let mode = 1.0 / (n as f64 - 1.0).max(1.0);
    let mut pts = vec![0.0];
    pts.extend(
        [0.25, 1.0, 3.0, 8.0]
            .iter()
            .map(|m| m * mode)
            .filter(|&x| x < 1.0),
    );
    pts.push(1.0);
    pts
}

/// `E_1 f(S)` by quadrature over the law of the extremes at `θ = 1`.
pub fn quad_expectation<F>(design: Design, mut f: F, tol: Tolerance) -> Result<QuadResult>
where
    F: FnMut(&SuffStat) -> Result<f64>,
{
    let k = design.k();
    let n = design.n();
    let mut failure: Option<Error> = None;
    let mut eval = |u1: f64, un: f64| -> f64 {
        if failure.is_some() {
            return 0.0;
        }
        match SuffStat::from_extremes(u1, un, design).and_then(|s| f(&s)) {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                0.0
            }
        }
    };
    let result = if n == 1 {
        quad::integrate(
            |r| {
                let u = design.lower() + 2.0 * k * r;
                eval(u, u)
            },
            0.0,
            1.0,
            tol,
        )
    } else {
        let nf = n as f64;
        quad::integrate_2d(
            |t, v| {
                let weight = nf * (nf - 1.0) * t * (1.0 - t).powi(n as i32 - 2);
                if weight == 0.0 {
                    return 0.0;
                }
                let u1 = design.lower() + 2.0 * k * t * v;
                let un = design.upper() - 2.0 * k * t * (1.0 - v);
                weight * eval(u1, un.max(u1))
            },
            &t_breaks(n),
            (0.0, 1.0),
            tol,
        )
    };
    match failure {
        Some(e) => Err(e),
        None => Ok(result),
    }
}

/// Exact risk at `θ = 1` by quadrature.
pub fn quad_risk(estimator: &Estimator, design: Design, loss: LossKind) -> Result<RiskReport> {
    let loss = risk_loss(loss)?;
    let r = quad_expectation(
        design,
        |s| loss.eval(1.0, estimator.estimate(s)?),
        QUAD_TOLERANCE,
    )?;
    Ok(RiskReport {
        estimator: estimator.name().to_string(),
        n: design.n(),
        k: design.k(),
        theta: 1.0,
        loss,
        method: Method::Quad,
        value: r.value,
        stderr: r.error,
        reps: None,
        seed: None,
    })
}

/// `risk(first) - risk(second)` at `θ = 1`, integrated as one paired integrand.
pub fn quad_risk_difference(
    first: &Estimator,
    second: &Estimator,
    design: Design,
    loss: LossKind,
) -> Result<QuadResult> {
    let loss = risk_loss(loss)?;
    quad_expectation(
        design,
        |s| Ok(loss.eval(1.0, first.estimate(s)?)? - loss.eval(1.0, second.estimate(s)?)?),
        QUAD_TOLERANCE,
    )
}

/// `E_1 ψ(S) - 1`.
pub fn quad_bias(estimator: &Estimator, design: Design) -> Result<f64> {
    Ok(quad_expectation(design, |s| Ok(estimator.estimate(s)? - 1.0), QUAD_TOLERANCE)?.value)
}

/// `Var_1 ψ(S)` by quadrature.
pub fn quad_variance(estimator: &Estimator, design: Design) -> Result<f64> {
    let mean = 1.0 + quad_bias(estimator, design)?;
    Ok(quad_expectation(
        design,
        |s| Ok((estimator.estimate(s)? - mean).powi(2)),
        QUAD_TOLERANCE,
    )?
    .value)
}

#[derive(Debug, Clone)]
pub struct ExperimentGrid {
    pub designs: Vec<Design>,
    pub losses: Vec<LossKind>,
    pub estimators: Vec<Estimator>,
    pub methods: Vec<Method>,
    pub reps: u64,
    pub seed: u64,
    pub workers: usize,
}

/// `n ∈ {2, 3, 5, 10, 30}` × `k ∈ {0.1, 0.3, 0.5, 0.7, 0.9}`.
pub fn default_designs() -> Vec<Design> {
    let mut out = Vec::new();
    for n in [2, 3, 5, 10, 30] {
        for k in [0.1, 0.3, 0.5, 0.7, 0.9] {
            out.push(Design::new(k, n).expect("grid values are valid"));
        }
    }
    out
}

impl ExperimentGrid {
    fn validate(&self) -> Result<()> {
        if self.designs.is_empty() || self.estimators.is_empty() || self.losses.is_empty() {
            return Err(Error::Unsupported(
                "experiment grid needs designs, estimators and losses".into(),
            ));
        }
        for loss in &self.losses {
            risk_loss(*loss)?;
        }
        if self.methods.contains(&Method::Mc) {
            McOptions::new(self.reps, self.seed).check()?;
        }
        Ok(())
    }

    /// Mixes the design and loss index into the seed so cells draw distinct streams.
    fn cell_seed(&self, cell: usize) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(u64::MAX - cell as u64);
        rng.random()
    }

    /// Risk of every estimator for every design, loss and method, at `θ = 1`.
    pub fn risks(&self) -> Result<Vec<RiskReport>> {
        Ok(self.cells()?.into_iter().flat_map(|c| c.risks).collect())
    }

    fn cells(&self) -> Result<Vec<Cell>> {
        self.validate()?;
        let mut out = Vec::new();
        let mut cell_index = 0;
        for &design in &self.designs {
            for &loss in &self.losses {
                for &method in &self.methods {
                    let cell = match method {
                        Method::Quad => quad_cell(&self.estimators, design, loss)?,
                        Method::Mc => {
                            let opts = McOptions {
                                reps: self.reps,
                                seed: self.cell_seed(cell_index),
                                workers: self.workers,
                            };
                            mc_cell(&self.estimators, design, loss, opts)?
                        }
                    };
                    out.push(cell);
                }
                cell_index += 1;
            }
        }
        Ok(out)
    }
}

struct Cell {
    risks: Vec<RiskReport>,
    pairs: Vec<PairwiseRow>,
}

fn quad_cell(estimators: &[Estimator], design: Design, loss: LossKind) -> Result<Cell> {
    let risks = estimators
        .iter()
        .map(|e| quad_risk(e, design, loss))
        .collect::<Result<Vec<_>>>()?;
    let mut pairs = Vec::new();
    for i in 0..estimators.len() {
        for j in i + 1..estimators.len() {
            let d = quad_risk_difference(&estimators[i], &estimators[j], design, loss)?;
            pairs.push(PairwiseRow::new(&risks[i], &risks[j], d.value, d.error));
        }
    }
    Ok(Cell { risks, pairs })
}

fn mc_cell(estimators: &[Estimator], design: Design, loss: LossKind, opts: McOptions) -> Result<Cell> {
    let table = mc_risks(estimators, 1.0, design, loss, opts)?;
    let mut pairs = Vec::new();
    for i in 0..estimators.len() {
        for j in i + 1..estimators.len() {
            let (diff, se) = table.paired_difference(i, j);
            pairs.push(PairwiseRow::new(&table.risks[i], &table.risks[j], diff, se));
        }
    }
    Ok(Cell {
        risks: table.risks,
        pairs,
    })
}

/// Comparison of two estimators within one (design, loss, method) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseRow {
    pub n: usize,
    pub k: f64,
    pub loss: LossKind,
    pub method: Method,
    pub first: String,
    pub second: String,
    pub first_risk: f64,
    pub second_risk: f64,
    /// `first_risk - second_risk`, from the paired integrand or paired replications.
    pub difference: f64,
    pub stderr: f64,
    /// `|difference| > 3·stderr`.
    pub significant: bool,
}

impl PairwiseRow {
    fn new(first: &RiskReport, second: &RiskReport, difference: f64, stderr: f64) -> Self {
        Self {
            n: first.n,
            k: first.k,
            loss: first.loss,
            method: first.method,
            first: first.estimator.clone(),
            second: second.estimator.clone(),
            first_risk: first.value,
            second_risk: second.value,
            difference,
            stderr,
            significant: difference.abs() > 3.0 * stderr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceTable {
    pub risks: Vec<RiskReport>,
    pub pairs: Vec<PairwiseRow>,
}

impl DominanceTable {
    pub fn risk(&self, n: usize, k: f64, loss: LossKind, method: Method, name: &str) -> Option<&RiskReport> {
        self.risks.iter().find(|r| {
            r.n == n && r.k == k && r.loss == loss && r.method == method && r.estimator == name
        })
    }

    /// Rows where `first` beats `second` across every cell, with significance.
    pub fn pair(&self, n: usize, k: f64, loss: LossKind, method: Method, first: &str, second: &str) -> Option<PairwiseRow> {
        self.pairs.iter().find_map(|p| {
            if p.n != n || p.k != k || p.loss != loss || p.method != method {
                return None;
            }
            if p.first == first && p.second == second {
                Some(p.clone())
            } else if p.first == second && p.second == first {
                Some(PairwiseRow {
                    first: p.second.clone(),
                    second: p.first.clone(),
                    first_risk: p.second_risk,
                    second_risk: p.first_risk,
                    difference: -p.difference,
                    ..p.clone()
                })
            } else {
                None
            }
        })
    }
}

/// Risks and all pairwise differences over the grid.
pub fn dominance_table(grid: &ExperimentGrid) -> Result<DominanceTable> {
    let cells = grid.cells()?;
    let mut table = DominanceTable {
        risks: Vec::new(),
        pairs: Vec::new(),
    };
    for cell in cells {
        table.risks.extend(cell.risks);
        table.pairs.extend(cell.pairs);
    }
    Ok(table)
}

/// Coverage of the equal-tailed fiducial intervals for several levels on shared samples.
pub fn coverage_many(
    gammas: &[f64],
    theta: f64,
    design: Design,
    opts: McOptions,
) -> Result<Vec<CoverageReport>> {
    opts.check()?;
    if gammas.is_empty() {
        return Err(Error::Unsupported("no interval levels requested".into()));
    }
    for &g in gammas {
        if !(g > 0.0 && g < 1.0) {
            return Err(domain("gamma", g, "must lie strictly inside (0, 1)"));
        }
    }
    let blocks = run_blocks(opts.reps, opts.seed, opts.workers, |rng, len| {
        let mut hits = vec![0u64; gammas.len()];
        for _ in 0..len {
            let s = sample_suff_stat(theta, design, rng)?;
            for (h, &g) in hits.iter_mut().zip(gammas) {
                let (lo, hi) = confidence_interval(&s, g)?;
                if lo <= theta && theta <= hi {
                    *h += 1;
                }
            }
        }
        Ok::<_, Error>(hits)
    });
    let mut hits = vec![0u64; gammas.len()];
    for block in blocks {
        for (h, b) in hits.iter_mut().zip(block?) {
            *h += b;
        }
    }
    Ok(gammas
        .iter()
        .zip(hits)
        .map(|(&gamma, hits)| {
            let coverage = hits as f64 / opts.reps as f64;
            CoverageReport {
                gamma,
                theta,
                n: design.n(),
                k: design.k(),
                reps: opts.reps,
                hits,
                coverage,
                stderr: binomial_stderr(1.0 - gamma, opts.reps),
                seed: opts.seed,
            }
        })
        .collect())
}

/// Fraction of replications whose level `1-γ` interval contains `θ`.
pub fn coverage(gamma: f64, theta: f64, design: Design, reps: u64, seed: u64) -> Result<CoverageReport> {
    coverage_with(gamma, theta, design, McOptions::new(reps, seed))
}

pub fn coverage_with(gamma: f64, theta: f64, design: Design, opts: McOptions) -> Result<CoverageReport> {
    Ok(coverage_many(&[gamma], theta, design, opts)?.remove(0))
}

/// KS check that `F_fid(θ | S)` is uniform when data come from `θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub n: usize,
    pub k: f64,
    pub theta: f64,
    pub reps: u64,
    pub ks_statistic: f64,
    pub p_value: f64,
}

pub fn calibration_ks(theta: f64, design: Design, opts: McOptions) -> Result<CalibrationReport> {
    opts.check()?;
    let blocks = run_blocks(opts.reps, opts.seed, opts.workers, |rng, len| {
        (0..len)
            .map(|_| Ok(fiducial_dist(&sample_suff_stat(theta, design, rng)?).cdf(theta)))
            .collect::<Result<Vec<f64>>>()
    });
    let mut values = Vec::with_capacity(opts.reps as usize);
    for block in blocks {
        values.extend(block?);
    }
    let d = ks_statistic(&mut values, |x| x.clamp(0.0, 1.0));
    Ok(CalibrationReport {
        n: design.n(),
        k: design.k(),
        theta,
        reps: opts.reps,
        ks_statistic: d,
        p_value: ks_pvalue(d, values.len()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivarianceReport {
    pub estimator: String,
    pub trials: usize,
    pub failures: usize,
    pub max_rel_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Relative tolerance for `ψ(c·y) = c·ψ(y)`.
pub const EQUIVARIANCE_TOLERANCE: f64 = 1e-12;

/// Checks scale equivariance on random designs, samples and factors `c ∈ [1e-6, 1e6]`.
pub fn equivariance_audit(estimator: &Estimator, trials: usize, seed: u64) -> Result<EquivarianceReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut failures = 0;
    for _ in 0..trials {
        let n = rng.random_range(1..=40usize);
        let k = rng.random_range(0.02..0.98);
        let design = Design::new(k, n)?;
        let theta = 10f64.powf(rng.random_range(-3.0..3.0));
        let c = 10f64.powf(rng.random_range(-6.0..6.0));
        let s = sample_suff_stat(theta, design, &mut rng)?;
        let base = estimator.estimate(&s)?;
        let scaled = estimator.estimate(&s.scaled(c)?)?;
        let err = (scaled - c * base).abs() / (c * base).abs();
        if !(err <= EQUIVARIANCE_TOLERANCE) {
            failures += 1;
        }
        worst = if err.is_nan() { f64::INFINITY } else { worst.max(err) };
    }
    Ok(EquivarianceReport {
        estimator: estimator.name().to_string(),
        trials,
        failures,
        max_rel_error: worst,
        tolerance: EQUIVARIANCE_TOLERANCE,
        passed: failures == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{catalog, lookup};

    #[test]
    fn quad_mass_is_one() {
        for n in [1, 2, 3, 10, 30] {
            let d = Design::new(0.5, n).unwrap();
            let r = quad_expectation(d, |_| Ok(1.0), QUAD_TOLERANCE).unwrap();
            assert!((r.value - 1.0).abs() < 1e-12, "n={n}: {r:?}");
        }
    }

    #[test]
    fn mle_bias_closed_form() {
        let d = Design::new(0.5, 3).unwrap();
        let bias = quad_bias(&lookup("mle").unwrap(), d).unwrap();
        assert!((bias - (1.25 / 1.5 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn dirac_loss_rejected() {
        let d = Design::new(0.5, 3).unwrap();
        let e = lookup("mle").unwrap();
        assert!(mc_risk(&e, 1.0, d, LossKind::Dirac, 1000, 1).is_err());
        assert!(quad_risk(&e, d, LossKind::Dirac).is_err());
        assert!(mc_risk(&e, 1.0, d, LossKind::Squared, 10, 1).is_err());
    }

    #[test]
    fn scaling_law() {
        let d = Design::new(0.5, 4).unwrap();
        let e = lookup("gm").unwrap();
        let r = quad_risk(&e, d, LossKind::Squared).unwrap();
        assert!((r.at_theta(3.0).unwrap().value - 9.0 * r.value).abs() < 1e-15);
        let r = quad_risk(&e, d, LossKind::LogSquared).unwrap();
        assert_eq!(r.at_theta(3.0).unwrap().value, r.value);
    }

    #[test]
    fn paired_differences_are_antisymmetric() {
        let d = Design::new(0.3, 3).unwrap();
        let t = mc_risks(&catalog()[..3], 1.0, d, LossKind::Squared, McOptions::new(2000, 4)).unwrap();
        let (a, sa) = t.paired_difference(0, 2);
        let (b, sb) = t.paired_difference(2, 0);
        assert_eq!(a, -b);
        assert_eq!(sa, sb);
        assert!((a - (t.risks[0].value - t.risks[2].value)).abs() < 1e-12);
    }

    #[test]
    fn equivariance_negative_control() {
        let broken = Estimator::new("shifted", false, |s| Ok(crate::estimators::gm(s) + 0.01));
        let r = equivariance_audit(&broken, 50, 3).unwrap();
        assert!(!r.passed);
    }

    #[test]
    fn coverage_of_sure_interval() {
        let d = Design::new(0.5, 5).unwrap();
        let r = coverage(1e-12, 1.0, d, 2000, 8).unwrap();
        assert_eq!(r.hits, 2000);
        assert!(coverage(0.0, 1.0, d, 2000, 8).is_err());
        assert!(coverage_many(&[], 1.0, d, McOptions::new(2000, 8)).is_err());
    }
}
