//! Globally adaptive Gauss-Kronrod (7/15) quadrature in one and two dimensions.
//!
//! The 2-D routine is an iterated integral: the outer adaptive rule calls an
//! inner adaptive rule at each node. Everything is deterministic for a given
//! integrand, which matters for reproducible report files.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Stopping rule: done once `error <= max(abs, rel * |value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self {
            abs,
            rel,
            max_intervals: 2000,
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-12, 1e-12)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Estimated absolute error.
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// One 15-point Kronrod evaluation on `[a, b]` with the QUADPACK error heuristic.
fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut result_k = fc * WGK[7];
    let mut result_g = fc * WG[3];
    let mut result_abs = result_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        result_k += WGK[j] * (f1 + f2);
        result_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            result_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = result_k * 0.5;
    let mut result_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        result_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = result_k * half;
    let result_abs = result_abs * half.abs();
    let result_asc = result_asc * half.abs();
    let mut error = ((result_k - result_g) * half).abs();
    if result_asc != 0.0 && error != 0.0 {
        error = result_asc * (1.0f64).min((200.0 * error / result_asc).powf(1.5));
    }
    if result_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * result_abs);
    }
    (value, error)
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> QuadResult {
    integrate_with_breaks(f, &[a, b], tol)
}

/// Integrates over `[points[0], points.last()]`, starting from the given subdivision.
///
/// Break points let the caller mark kinks or places where the integrand is
/// concentrated. `points` must be nondecreasing with at least two entries.
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    tol: Tolerance,
) -> QuadResult {
    assert!(points.len() >= 2, "need at least one interval");
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in points.windows(2) {
        if w[1] > w[0] {
            let (value, error) = kronrod(&mut f, w[0], w[1]);
            evaluations += 15;
            heap.push(Panel {
                a: w[0],
                b: w[1],
                value,
                error,
            });
        }
    }
    let totals = |heap: &BinaryHeap<Panel>| {
        // sum in a fixed order so the result does not depend on heap layout
        let mut panels: Vec<&Panel> = heap.iter().collect();
        panels.sort_by(|p, q| p.a.total_cmp(&q.a));
        panels
            .iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error))
    };
    let (mut value, mut error) = totals(&heap);
    loop {
        let done = error <= tol.target(value);
        if done || heap.len() >= tol.max_intervals {
            let (value, error) = totals(&heap);
            return QuadResult {
                value,
                error,
                evaluations,
                converged: done || error <= tol.target(value),
            };
        }
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // interval cannot be split further in floating point
            heap.push(worst);
            let (value, error) = totals(&heap);
            return QuadResult {
                value,
                error,
                evaluations,
                converged: false,
            };
        }
        value -= worst.value;
        error -= worst.error;
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (v, e) = kronrod(&mut f, a, b);
            evaluations += 15;
            value += v;
            error += e;
            heap.push(Panel { a, b, value: v, error: e });
        }
        if heap.len() % 64 == 0 {
            // refresh to shed accumulated rounding in the running sums
            (value, error) = totals(&heap);
        }
    }
}

/// Iterated integral of `f(x, y)` over `[x_breaks] × [y0, y1]`.
///
/// The inner integrals run at a tenth of the outer tolerance; the reported
/// error is the outer estimate plus the worst inner estimate times the
/// outer interval length.
pub fn integrate_2d<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    x_breaks: &[f64],
    y_range: (f64, f64),
    tol: Tolerance,
) -> QuadResult {
    let inner_tol = Tolerance {
        abs: tol.abs * 0.1,
        rel: tol.rel * 0.1,
        max_intervals: tol.max_intervals,
    };
    let mut worst_inner = 0.0f64;
    let mut inner_evals = 0;
    let mut all_inner_converged = true;
    let outer = integrate_with_breaks(
        |x| {
            let r = integrate(|y| f(x, y), y_range.0, y_range.1, inner_tol);
            worst_inner = worst_inner.max(r.error);
            inner_evals += r.evaluations;
            all_inner_converged &= r.converged;
            r.value
        },
        x_breaks,
        tol,
    );
    let span = x_breaks[x_breaks.len() - 1] - x_breaks[0];
    QuadResult {
        value: outer.value,
        error: outer.error + worst_inner * span,
        evaluations: inner_evals,
        converged: outer.converged && all_inner_converged,
    }
}

/// Non-adaptive composite 15-point Kronrod rule on `panels` equal pieces.
///
/// Fixed nodes make the result a fixed linear functional of `f`, which is
/// what a grid search over a parameter of the integrand needs.
pub fn composite<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + h * i as f64;
            let hi = if i + 1 == panels { b } else { lo + h };
            kronrod(&mut f, lo, hi).0
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let r = integrate(|x| x.powi(6) - 3.0 * x * x, 0.0, 2.0, Tolerance::default());
        assert!((r.value - (128.0 / 7.0 - 8.0)).abs() < 1e-13);
        assert!(r.converged);
    }

    #[test]
    fn peaked_integrand() {
        let tol = Tolerance::new(1e-13, 1e-13);
        let r = integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, tol);
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((r.value - exact).abs() / exact < 1e-12, "{r:?}");
    }

    #[test]
    fn endpoint_singularity() {
        let r = integrate(|x| x.ln(), 0.0, 1.0, Tolerance::new(1e-10, 1e-10));
        assert!((r.value + 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_dimensional_square() {
        // ∫∫ e^{x y} over [0,1]² = Σ 1/(j·j!)
        let r = integrate_2d(
            |x, y| (x * y).exp(),
            &[0.0, 0.5, 1.0],
            (0.0, 1.0),
            Tolerance::new(1e-11, 1e-11),
        );
        let mut exact = 0.0;
        let mut fact = 1.0;
        for j in 1..30 {
            fact *= j as f64;
            exact += 1.0 / (j as f64 * fact);
        }
        assert!((r.value - exact).abs() < 1e-11, "{r:?}");
        assert!(r.converged);
    }

    #[test]
    fn composite_matches_adaptive() {
        let c = composite(|x: f64| x.exp(), 0.0, 3.0, 8);
        assert!((c - (3.0f64.exp() - 1.0)).abs() < 1e-12);
    }
}
