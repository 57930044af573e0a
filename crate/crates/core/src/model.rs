//! The scaled uniform data model `y = θ·u`, with `u` uniform on `[1-k, 1+k]`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Relative slack allowed when checking `theta_ml <= theta_mu`.
///
/// Samples sitting exactly on the support boundary, like `(θ(1-k), θ(1+k))`,
/// can round to an infeasible pair by a few ulps.
const FEASIBILITY_SLACK: f64 = 1e-12;

/// Known design of an experiment: spread `k` and sample size `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Design {
    k: f64,
    n: usize,
}

impl Design {
    pub fn new(k: f64, n: usize) -> Result<Self> {
        if !(k > 0.0 && k < 1.0) {
            return Err(domain("k", k, "spread must lie strictly inside (0, 1)"));
        }
        if n == 0 {
            return Err(domain("n", 0.0, "sample size must be at least 1"));
        }
        Ok(Self { k, n })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Lower end `1-k` of the standardized support.
    pub fn lower(&self) -> f64 {
        1.0 - self.k
    }

    /// Upper end `1+k` of the standardized support.
    pub fn upper(&self) -> f64 {
        1.0 + self.k
    }
}

/// Observations `y_1..y_n` together with the design that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    design: Design,
    values: Vec<f64>,
}

impl Sample {
    pub fn new(design: Design, values: Vec<f64>) -> Result<Self> {
        if values.len() != design.n() {
            return Err(Error::LengthMismatch {
                expected: design.n(),
                got: values.len(),
            });
        }
        if let Some(&bad) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(domain("y", bad, "observations must be positive and finite"));
        }
        Ok(Self { design, values })
    }

    pub fn design(&self) -> Design {
        self.design
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Multiplies every observation by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(domain("c", c, "scale factor must be positive"));
        }
        Ok(Self {
            design: self.design,
            values: self.values.iter().map(|v| v * c).collect(),
        })
    }
}

/// Minimal sufficient summary of a feasible sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuffStat {
    y_min: f64,
    y_max: f64,
    theta_ml: f64,
    theta_mu: f64,
    design: Design,
}

impl SuffStat {
    /// Builds the statistic from the smallest and largest observation.
    ///
    /// Rejects pairs whose sure interval `[y_max/(1+k), y_min/(1-k)]` is empty.
    pub fn from_extremes(y_min: f64, y_max: f64, design: Design) -> Result<Self> {
        if !(y_min > 0.0 && y_min.is_finite()) {
            return Err(domain("y_min", y_min, "observations must be positive and finite"));
        }
        if !(y_max.is_finite() && y_max >= y_min) {
            return Err(domain("y_max", y_max, "must be finite and at least y_min"));
        }
        let theta_ml = y_max / design.upper();
        let theta_mu = y_min / design.lower();
        if theta_ml > theta_mu * (1.0 + FEASIBILITY_SLACK) {
            return Err(Error::Infeasible {
                k: design.k(),
                theta_ml,
                theta_mu,
            });
        }
        Ok(Self {
            y_min,
            y_max,
            theta_ml,
            theta_mu: theta_mu.max(theta_ml),
            design,
        })
    }

    pub fn from_sample(sample: &Sample) -> Result<Self> {
        let (lo, hi) = sample
            .values()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        Self::from_extremes(lo, hi, sample.design())
    }

    pub fn y_min(&self) -> f64 {
        self.y_min
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    /// Lower end of the sure interval; also the maximum likelihood estimate.
    pub fn theta_ml(&self) -> f64 {
        self.theta_ml
    }

    /// Upper end of the sure interval.
    pub fn theta_mu(&self) -> f64 {
        self.theta_mu
    }

    /// Ancillary ratio `y_min / y_max`.
    pub fn s2(&self) -> f64 {
        self.y_min / self.y_max
    }

    /// `theta_mu / theta_ml`, at least 1.
    pub fn b_star(&self) -> f64 {
        self.theta_mu / self.theta_ml
    }

    /// `ln b_star`, clamped at 0.
    pub fn ln_b_star(&self) -> f64 {
        (self.theta_mu / self.theta_ml).ln().max(0.0)
    }

    pub fn design(&self) -> Design {
        self.design
    }

    pub fn n(&self) -> usize {
        self.design.n()
    }

    pub fn k(&self) -> f64 {
        self.design.k()
    }

    /// Sufficient statistic of the rescaled data `c·y`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(domain("c", c, "scale factor must be positive"));
        }
        Self::from_extremes(self.y_min * c, self.y_max * c, self.design)
    }

    /// True when `theta` lies in the sure interval.
    pub fn contains(&self, theta: f64) -> bool {
        self.theta_ml <= theta && theta <= self.theta_mu
    }
}

/// Draws `n` observations with `y_i = θ·(1-k + 2k·r_i)`, `r_i` uniform on `[0,1)`.
pub fn sample_scaled_uniform<R: Rng + ?Sized>(
    theta: f64,
    design: Design,
    rng: &mut R,
) -> Result<Sample> {
    check_theta(theta)?;
    let values = (0..design.n())
        .map(|_| draw_one(theta, design, rng))
        .collect();
    Ok(Sample { design, values })
}

/// Same draws as [`sample_scaled_uniform`], reduced straight to the sufficient statistic.
///
/// Consumes the random stream identically, so both paths agree for a given seed.
pub fn sample_suff_stat<R: Rng + ?Sized>(theta: f64, design: Design, rng: &mut R) -> Result<SuffStat> {
    check_theta(theta)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for _ in 0..design.n() {
        let y = draw_one(theta, design, rng);
        lo = lo.min(y);
        hi = hi.max(y);
    }
    SuffStat::from_extremes(lo, hi, design)
}

#[inline]
fn draw_one<R: Rng + ?Sized>(theta: f64, design: Design, rng: &mut R) -> f64 {
    let r: f64 = rng.random();
    theta * (design.lower() + 2.0 * design.k() * r)
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(domain("theta", theta, "scale parameter must be positive"))
    }
}

/// Likelihood `(2kθ)^{-n}` on the sure interval, zero elsewhere.
pub fn likelihood(theta: f64, s: &SuffStat) -> Result<f64> {
    Ok(log_likelihood(theta, s)?.exp())
}

/// Log-likelihood; `-inf` off the sure interval.
pub fn log_likelihood(theta: f64, s: &SuffStat) -> Result<f64> {
    check_theta(theta)?;
    if !s.contains(theta) {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(-(s.n() as f64) * (2.0 * s.k() * theta).ln())
}

/// Joint density of `(U_(1), U_(n))` for `n >= 2` iid uniforms on `[1-k, 1+k]`.
pub fn order_stat_density(u1: f64, un: f64, design: Design) -> Result<f64> {
    let n = design.n();
    if n < 2 {
        return Err(domain(
            "n",
            n as f64,
            "joint density of min and max needs n >= 2",
        ));
    }
    if u1 < design.lower() || un > design.upper() || u1 > un {
        return Ok(0.0);
    }
    let nf = n as f64;
    let width = 2.0 * design.k();
    Ok(nf * (nf - 1.0) * (un - u1).powi(n as i32 - 2) / width.powi(n as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn example() -> SuffStat {
        let d = Design::new(0.5, 3).unwrap();
        SuffStat::from_sample(&Sample::new(d, vec![0.9, 1.2, 1.0]).unwrap()).unwrap()
    }

    #[test]
    fn design_bounds() {
        assert!(Design::new(0.0, 3).is_err());
        assert!(Design::new(1.0, 3).is_err());
        assert!(Design::new(f64::NAN, 3).is_err());
        assert!(Design::new(0.5, 0).is_err());
        assert!(Design::new(0.5, 1).is_ok());
    }

    #[test]
    fn sample_validation() {
        let d = Design::new(0.5, 2).unwrap();
        assert!(matches!(
            Sample::new(d, vec![1.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(Sample::new(d, vec![1.0, -1.0]).is_err());
        assert!(Sample::new(d, vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn suff_stat_example() {
        let s = example();
        assert_eq!(s.y_min(), 0.9);
        assert_eq!(s.y_max(), 1.2);
        assert!((s.theta_ml() - 0.8).abs() < 1e-15);
        assert!((s.theta_mu() - 1.8).abs() < 1e-15);
        assert!((s.s2() - 0.75).abs() < 1e-15);
        assert!((s.b_star() - 2.25).abs() < 1e-14);
    }

    #[test]
    fn suff_stat_tie() {
        let d = Design::new(0.3, 3).unwrap();
        let s = SuffStat::from_sample(&Sample::new(d, vec![2.0; 3]).unwrap()).unwrap();
        assert_eq!(s.y_min(), s.y_max());
        assert_eq!(s.s2(), 1.0);
    }

    #[test]
    fn suff_stat_infeasible() {
        let d = Design::new(0.5, 2).unwrap();
        let err = SuffStat::from_sample(&Sample::new(d, vec![1.0, 3.1]).unwrap()).unwrap_err();
        match err {
            Error::Infeasible {
                theta_ml, theta_mu, ..
            } => {
                assert!((theta_ml - 3.1 / 1.5).abs() < 1e-15);
                assert!((theta_mu - 2.0).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn boundary_sample_is_point_interval() {
        let d = Design::new(0.7, 4).unwrap();
        let s = SuffStat::from_extremes(3.0 * 0.3, 3.0 * 1.7, d).unwrap();
        assert_eq!(s.b_star(), 1.0);
        assert_eq!(s.ln_b_star(), 0.0);
    }

    #[test]
    fn likelihood_values() {
        let s = example();
        assert!((likelihood(1.0, &s).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(likelihood(0.5, &s).unwrap(), 0.0);
        assert_eq!(likelihood(2.0, &s).unwrap(), 0.0);
        assert_eq!(log_likelihood(0.5, &s).unwrap(), f64::NEG_INFINITY);
        assert!(likelihood(0.0, &s).is_err());
        // maximum at the lower end of the sure interval
        let at_ml = likelihood(s.theta_ml(), &s).unwrap();
        for t in [0.81, 1.0, 1.5, 1.8] {
            assert!(likelihood(t, &s).unwrap() < at_ml);
        }
    }

    #[test]
    fn sampling_support() {
        let d = Design::new(0.5, 50).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let y = sample_scaled_uniform(2.0, d, &mut rng).unwrap();
        assert!(y.values().iter().all(|&v| (1.0..=3.0).contains(&v)));
        assert!(sample_scaled_uniform(-1.0, d, &mut rng).is_err());
    }

    #[test]
    fn tiny_spread_concentrates() {
        let d = Design::new(1e-9, 20).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let y = sample_scaled_uniform(1.0, d, &mut rng).unwrap();
        assert!(y.values().iter().all(|&v| (v - 1.0).abs() <= 1e-9));
    }

    #[test]
    fn sample_mean_matches_moments() {
        let n = 1_000_000;
        let d = Design::new(0.5, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let y = sample_scaled_uniform(1.0, d, &mut rng).unwrap();
        let mean = y.values().iter().sum::<f64>() / n as f64;
        let sd = (0.25f64 / 3.0).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * sd / (n as f64).sqrt());
    }

    #[test]
    fn suff_stat_path_matches_full_sample() {
        let d = Design::new(0.4, 7).unwrap();
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let full = SuffStat::from_sample(&sample_scaled_uniform(1.7, d, &mut a).unwrap()).unwrap();
            let direct = sample_suff_stat(1.7, d, &mut b).unwrap();
            assert_eq!(full, direct);
        }
    }

    #[test]
    fn order_stat_density_values() {
        let d2 = Design::new(0.5, 2).unwrap();
        assert_eq!(order_stat_density(0.7, 1.2, d2).unwrap(), 2.0);
        assert_eq!(order_stat_density(1.2, 0.7, d2).unwrap(), 0.0);
        assert_eq!(order_stat_density(0.4, 1.2, d2).unwrap(), 0.0);
        assert!(order_stat_density(1.0, 1.0, Design::new(0.5, 1).unwrap()).is_err());
    }
}
