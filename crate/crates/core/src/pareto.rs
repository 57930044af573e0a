//! Truncated Pareto laws `Pareto(α, [a, b])` with density proportional to
//! `θ^{-α-1}` on `[a, b]`.
//!
//! The index may be negative: the conditional law of the sample maximum given
//! the ancillary ratio has index `-n`. Every closed form is written in terms of
//! `x = ln(θ/a)` and `L = ln(b/a)` so that narrow supports (`b/a` close to 1)
//! and large `|α|·L` stay accurate and free of overflow.
//!
//! The workhorse is `g(c) = ∫_0^L e^{-c x} dx = (1 - e^{-cL}) / c`, with `g(0) = L`.
//! The moment `E[Θ^m]` equals `a^m g(α - m) / g(α)`, which covers the
//! logarithmic case `m = α` without a separate branch.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncPareto {
    alpha: f64,
    a: f64,
    b: f64,
}

impl TruncPareto {
    pub fn new(alpha: f64, a: f64, b: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha == 0.0 {
            return Err(domain("alpha", alpha, "index must be finite and nonzero"));
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(domain("a", a, "lower truncation must be positive"));
        }
        if !(b >= a && b.is_finite()) {
            return Err(domain("b", b, "upper truncation must be at least a"));
        }
        Ok(Self { alpha, a, b })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn is_point_mass(&self) -> bool {
        self.a == self.b
    }

    /// `ln(b/a)`.
    fn span(&self) -> f64 {
        (self.b / self.a).ln()
    }

    /// Law of `c·Θ`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(domain("c", c, "scale factor must be positive"));
        }
        Self::new(self.alpha, self.a * c, self.b * c)
    }

    /// Law of `y/Θ`, which is `Pareto(-α, [y/b, y/a])`.
    pub fn reciprocal(&self, y: f64) -> Result<Self> {
        if !(y > 0.0 && y.is_finite()) {
            return Err(domain("y", y, "numerator must be positive"));
        }
        Self::new(-self.alpha, y / self.b, y / self.a)
    }

    /// Density. A point mass reports `+inf` at its atom.
    pub fn pdf(&self, theta: f64) -> f64 {
        if theta < self.a || theta > self.b || theta.is_nan() {
            return 0.0;
        }
        if self.is_point_mass() {
            return f64::INFINITY;
        }
        let x = (theta / self.a).ln().clamp(0.0, self.span());
        let l = self.span();
        if self.alpha > 0.0 {
            (self.alpha / theta) * (-self.alpha * x).exp() / -(-self.alpha * l).exp_m1()
        } else {
            let beta = -self.alpha;
            (beta / theta) * (beta * (x - l)).exp() / -(-beta * l).exp_m1()
        }
    }

    pub fn cdf(&self, theta: f64) -> f64 {
        if theta.is_nan() {
            return f64::NAN;
        }
        if theta < self.a {
            return 0.0;
        }
        if theta >= self.b {
            return 1.0;
        }
        let l = self.span();
        let x = (theta / self.a).ln().clamp(0.0, l);
        let p = if self.alpha > 0.0 {
            (-self.alpha * x).exp_m1() / (-self.alpha * l).exp_m1()
        } else {
            let beta = -self.alpha;
            (beta * (x - l)).exp() * (-beta * x).exp_m1() / (-beta * l).exp_m1()
        };
        p.clamp(0.0, 1.0)
    }

    /// Inverse of [`cdf`](Self::cdf) on `[0, 1]`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(domain("p", p, "probability must lie in [0, 1]"));
        }
        if self.is_point_mass() || p == 0.0 {
            return Ok(self.a);
        }
        if p == 1.0 {
            return Ok(self.b);
        }
        let l = self.span();
        let x = if self.alpha > 0.0 {
            -(p * (-self.alpha * l).exp_m1()).ln_1p() / self.alpha
        } else {
            let beta = -self.alpha;
            l + ((1.0 - p) * (-beta * l).exp_m1()).ln_1p() / beta
        };
        Ok((self.a * x.clamp(0.0, l).exp()).clamp(self.a, self.b))
    }

    /// Inverse-transform draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.is_point_mass() {
            return self.a;
        }
        let u: f64 = rng.random();
        self.quantile(u).expect("uniform draw lies in [0, 1)")
    }

    /// `E[Θ^m]` for any real `m`.
    pub fn moment(&self, m: f64) -> f64 {
        if m == 0.0 {
            return 1.0;
        }
        if self.is_point_mass() {
            return self.a.powf(m);
        }
        let l = self.span();
        (m * self.a.ln() + ln_g(self.alpha - m, l) - ln_g(self.alpha, l)).exp()
    }

    pub fn mean(&self) -> f64 {
        self.moment(1.0)
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5).expect("0.5 is a probability")
    }

    /// `E[ln Θ] = ln a + 1/α - L/(e^{αL} - 1)`.
    pub fn log_moment(&self) -> f64 {
        if self.is_point_mass() {
            return self.a.ln();
        }
        let z = self.alpha * self.span();
        self.a.ln() + one_minus_z_over_expm1(z) / self.alpha
    }
}

/// `ln g(c)` with `g(c) = (1 - e^{-cL})/c`, `g(0) = L`, for `L > 0`.
fn ln_g(c: f64, l: f64) -> f64 {
    let x = c.abs() * l;
    // g(c) = e^{max(-cL, 0)} · L · h(|c| L) with h(x) = (1 - e^{-x})/x
    let shift = if c < 0.0 { x } else { 0.0 };
    shift + l.ln() + ln_h(x)
}

/// `ln((1 - e^{-x})/x)` for `x >= 0`.
fn ln_h(x: f64) -> f64 {
    if x < 1e-5 {
        // h(x) = 1 - x/2 + x²/6 - x³/24 + ...
        (-x / 2.0 + x * x / 6.0 - x * x * x / 24.0).ln_1p()
    } else {
        (-(-x).exp_m1()).ln() - x.ln()
    }
}

/// `1 - z/(e^z - 1)`, accurate near `z = 0`.
fn one_minus_z_over_expm1(z: f64) -> f64 {
    if z.abs() < 0.05 {
        // Bernoulli series: z/(e^z - 1) = 1 - z/2 + z²/12 - z⁴/720 + z⁶/30240 - z⁸/1209600
        let z2 = z * z;
        z / 2.0 - z2 / 12.0 + z2 * z2 / 720.0 - z2 * z2 * z2 / 30240.0
            + z2 * z2 * z2 * z2 / 1_209_600.0
    } else if z < -700.0 {
        1.0 + z
    } else {
        1.0 - z / z.exp_m1()
    }
}
