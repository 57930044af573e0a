//! The fiducial distribution `Θ ~ Pareto(n, [theta_ml, theta_mu])` and the
//! decisions derived from it.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::estimators;
use crate::model::SuffStat;
use crate::pareto::TruncPareto;
use crate::quad;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiducialDist {
    dist: TruncPareto,
    source: SuffStat,
}

pub fn fiducial_dist(s: &SuffStat) -> FiducialDist {
    let dist = TruncPareto::new(s.n() as f64, s.theta_ml(), s.theta_mu())
        .expect("a valid statistic has a nonempty sure interval");
    FiducialDist { dist, source: *s }
}

impl FiducialDist {
    pub fn dist(&self) -> &TruncPareto {
        &self.dist
    }

    pub fn source(&self) -> &SuffStat {
        &self.source
    }

    pub fn cdf(&self, theta: f64) -> f64 {
        self.dist.cdf(theta)
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        self.dist.quantile(p)
    }

    /// Direct draw from the closed form.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.dist.sample(rng)
    }
}

/// Draws `y_max / V` with `V ~ (U_(n) | U_(1)/U_(n) = s2)`.
///
/// Same law as [`FiducialDist::sample`], reached through the sufficient
/// data-generating equation instead of the closed form.
pub fn fiducial_sample_via_conditioning<R: Rng + ?Sized>(s: &SuffStat, rng: &mut R) -> f64 {
    let v = estimators::conditional_max_law(s.s2(), s.design())
        .expect("s2 of a valid statistic is in range")
        .sample(rng);
    (s.y_max() / v).clamp(s.theta_ml(), s.theta_mu())
}

/// Loss functions `L(θ, θ̂)` used both for fiducial decisions and frequentist risk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// `-δ(θ - θ̂)`; optimal decision is the density mode.
    Dirac,
    /// `(θ - θ̂)²`
    Squared,
    /// `(θ - θ̂)²/θ`
    Weighted,
    /// `(1 - θ̂/θ)²`
    ScaledSquared,
    /// `(ln θ - ln θ̂)²`
    LogSquared,
}

impl LossKind {
    pub const ALL: [LossKind; 5] = [
        LossKind::Dirac,
        LossKind::Squared,
        LossKind::Weighted,
        LossKind::ScaledSquared,
        LossKind::LogSquared,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            LossKind::Dirac => "dirac",
            LossKind::Squared => "squared",
            LossKind::Weighted => "weighted",
            LossKind::ScaledSquared => "scaled_squared",
            LossKind::LogSquared => "log_squared",
        }
    }

    /// Pointwise loss. The Dirac loss has no pointwise value.
    pub fn eval(&self, theta: f64, estimate: f64) -> Result<f64> {
        Ok(match self {
            LossKind::Dirac => {
                return Err(Error::Unsupported(
                    "the dirac loss has no pointwise value".into(),
                ))
            }
            LossKind::Squared => (theta - estimate).powi(2),
            LossKind::Weighted => (theta - estimate).powi(2) / theta,
            LossKind::ScaledSquared => (1.0 - estimate / theta).powi(2),
            LossKind::LogSquared => (theta.ln() - estimate.ln()).powi(2),
        })
    }

    /// Power `e` with `risk(θ) = θ^e · risk(1)` for scale-equivariant rules.
    pub fn scale_exponent(&self) -> Option<i32> {
        match self {
            LossKind::Dirac => None,
            LossKind::Squared => Some(2),
            LossKind::Weighted => Some(1),
            LossKind::ScaledSquared | LossKind::LogSquared => Some(0),
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LossKind::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| {
                Error::Unsupported(format!(
                    "unknown loss `{s}`; expected one of dirac, squared, weighted, scaled_squared, log_squared"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalKind {
    #[default]
    EqualTailed,
    /// `[theta_ml, quantile(1-γ)]`; the density is decreasing.
    HighestDensity,
}

/// Equal-tailed interval `[quantile(γ/2), quantile(1-γ/2)]`, level `1-γ`.
pub fn confidence_interval(s: &SuffStat, gamma: f64) -> Result<(f64, f64)> {
    confidence_interval_with(s, gamma, IntervalKind::EqualTailed)
}

pub fn confidence_interval_with(
    s: &SuffStat,
    gamma: f64,
    kind: IntervalKind,
) -> Result<(f64, f64)> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(domain("gamma", gamma, "must lie strictly inside (0, 1)"));
    }
    let fid = fiducial_dist(s);
    match kind {
        IntervalKind::EqualTailed => Ok((
            fid.quantile(gamma / 2.0)?,
            fid.quantile(1.0 - gamma / 2.0)?,
        )),
        IntervalKind::HighestDensity => Ok((s.theta_ml(), fid.quantile(1.0 - gamma)?)),
    }
}

/// Minimizer of the fiducial expected loss.
pub fn point_estimate(s: &SuffStat, loss: LossKind) -> f64 {
    match loss {
        LossKind::Dirac => estimators::map(s),
        LossKind::Squared => estimators::gt(s),
        LossKind::Weighted => estimators::gm(s),
        LossKind::ScaledSquared => estimators::opt(s),
        LossKind::LogSquared => estimators::sc(s),
    }
}

/// Number of 15-point panels used by [`fiducial_expected_loss`].
const EXPECTED_LOSS_PANELS: usize = 64;

/// `E L(Θ, θ̂)` under the fiducial law.
///
/// Integrates over `u = ln(Θ/θ_ML)`, where the fiducial weight `θ·f(θ)` is a
/// smooth exponential, with a fixed composite rule so that the result is a
/// fixed functional of the loss. For the Dirac loss this is `-density(θ̂)`.
pub fn fiducial_expected_loss(s: &SuffStat, loss: LossKind, estimate: f64) -> Result<f64> {
    let fid = fiducial_dist(s);
    let dist = fid.dist();
    if loss == LossKind::Dirac {
        return Ok(-dist.pdf(estimate));
    }
    if dist.is_point_mass() {
        return loss.eval(dist.a(), estimate);
    }
    let (a, b) = (dist.a(), dist.b());
    let mut failure = None;
    let value = quad::composite(
        |u| {
            let theta = (a * u.exp()).min(b);
            let weight = theta * dist.pdf(theta);
            loss.eval(theta, estimate).map(|l| l * weight).unwrap_or_else(|e| {
                failure = Some(e);
                f64::NAN
            })
        },
        0.0,
        (b / a).ln(),
        EXPECTED_LOSS_PANELS,
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// Grid search for the minimizer of `f` on `[lo, hi]`, refined until the
/// grid spacing is at most `resolution`. Assumes `f` is unimodal.
pub fn grid_argmin<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, resolution: f64) -> f64 {
    const POINTS: usize = 41;
    let (mut lo, mut hi) = (lo, hi);
    loop {
        let step = (hi - lo) / (POINTS - 1) as f64;
        let (best, _) = (0..POINTS)
            .map(|i| {
                let x = if i + 1 == POINTS { hi } else { lo + step * i as f64 };
                (x, f(x))
            })
            .fold((lo, f64::INFINITY), |acc, (x, v)| if v < acc.1 { (x, v) } else { acc });
        if step <= resolution || step == 0.0 {
            return best;
        }
        let (new_lo, new_hi) = ((best - step).max(lo), (best + step).min(hi));
        lo = new_lo;
        hi = new_hi;
    }
}

/// Brute-force minimizer of the fiducial expected loss over the sure interval.
pub fn expected_loss_argmin(s: &SuffStat, loss: LossKind, resolution: f64) -> Result<f64> {
    // validate the loss once so the search closure cannot fail
    fiducial_expected_loss(s, loss, s.theta_ml())?;
    Ok(grid_argmin(
        |t| fiducial_expected_loss(s, loss, t).expect("loss validated"),
        s.theta_ml(),
        s.theta_mu(),
        resolution,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Design, Sample};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn example() -> SuffStat {
        let d = Design::new(0.5, 3).unwrap();
        SuffStat::from_sample(&Sample::new(d, vec![0.9, 1.2, 1.0]).unwrap()).unwrap()
    }

    #[test]
    fn fiducial_of_example() {
        let fid = fiducial_dist(&example());
        assert_eq!(fid.dist().alpha(), 3.0);
        assert!((fid.dist().a() - 0.8).abs() < 1e-15);
        assert!((fid.dist().b() - 1.8).abs() < 1e-15);
    }

    #[test]
    fn fiducial_scales_with_data() {
        let s = example();
        let scaled = fiducial_dist(&s.scaled(2.0).unwrap());
        let expected = fiducial_dist(&s).dist().scaled(2.0).unwrap();
        assert!((scaled.dist().a() - expected.a()).abs() < 1e-15);
        assert!((scaled.dist().b() - expected.b()).abs() < 1e-15);
    }

    #[test]
    fn point_interval_sampling() {
        let s = SuffStat::from_extremes(0.5, 1.5, Design::new(0.5, 4).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            assert_eq!(fiducial_sample_via_conditioning(&s, &mut rng), s.theta_ml());
        }
    }

    #[test]
    fn interval_shapes() {
        let s = example();
        let (lo, hi) = confidence_interval(&s, 0.5).unwrap();
        let fid = fiducial_dist(&s);
        assert!((fid.cdf(lo) - 0.25).abs() < 1e-12 && (fid.cdf(hi) - 0.75).abs() < 1e-12);
        assert!((fid.quantile(0.5).unwrap() - 0.980_057_220_258_694).abs() < 1e-14);
        let (lo, hi) = confidence_interval(&s, 1e-12).unwrap();
        assert!((lo - 0.8).abs() < 1e-9 && (hi - 1.8).abs() < 1e-9);
        let (lo, hi) = confidence_interval(&s, 1.0 - 1e-12).unwrap();
        assert!((lo - hi).abs() < 1e-9);
        assert!(confidence_interval(&s, 0.0).is_err());
        assert!(confidence_interval(&s, 1.0).is_err());
        let (lo, hi) = confidence_interval_with(&s, 0.1, IntervalKind::HighestDensity).unwrap();
        assert!((lo - 0.8).abs() < 1e-15);
        assert!((fid.cdf(hi) - 0.9).abs() < 1e-12);
    }

    #[test]
    fn dispatch() {
        let s = example();
        assert_eq!(point_estimate(&s, LossKind::Squared), estimators::bayes_p(&s, 1.0).unwrap());
        assert!((point_estimate(&s, LossKind::ScaledSquared) - 0.977941).abs() < 5e-7);
        assert_eq!(point_estimate(&s, LossKind::Dirac), s.theta_ml());
    }

    #[test]
    fn losses() {
        assert!(LossKind::Dirac.eval(1.0, 1.0).is_err());
        assert_eq!(LossKind::Squared.eval(2.0, 1.0).unwrap(), 1.0);
        assert_eq!(LossKind::Weighted.eval(2.0, 1.0).unwrap(), 0.5);
        assert_eq!(LossKind::ScaledSquared.eval(2.0, 1.0).unwrap(), 0.25);
        assert_eq!("log_squared".parse::<LossKind>().unwrap(), LossKind::LogSquared);
        assert!("l2".parse::<LossKind>().is_err());
    }

    #[test]
    fn grid_argmin_finds_quadratic_minimum() {
        let x = grid_argmin(|x| (x - 0.123_456_7).powi(2), 0.0, 1.0, 1e-9);
        assert!((x - 0.123_456_7).abs() <= 1e-9);
        let edge = grid_argmin(|x| x, 0.3, 0.9, 1e-9);
        assert_eq!(edge, 0.3);
    }
}
