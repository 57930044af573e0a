//! Running moments and Kolmogorov-Smirnov machinery for the simulation checks.

use serde::{Deserialize, Serialize};

/// Count, mean and centered second moment, mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. pairwise combination.
    pub fn merge(&self, other: &Moments) -> Moments {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let w = other.count as f64 / count as f64;
        Moments {
            count,
            mean: self.mean + delta * w,
            m2: self.m2 + other.m2 + delta * delta * self.count as f64 * w,
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// Reduces `items` by a balanced binary tree in index order.
pub fn pairwise_reduce<T: Clone, F: Fn(&T, &T) -> T>(items: &[T], merge: &F) -> Option<T> {
    match items.len() {
        0 => None,
        1 => Some(items[0].clone()),
        len => {
            let (left, right) = items.split_at(len / 2);
            let l = pairwise_reduce(left, merge)?;
            let r = pairwise_reduce(right, merge)?;
            Some(merge(&l, &r))
        }
    }
}

/// Survival function of the Kolmogorov distribution, `P(K > x)`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.3 {
        // alternating series converges poorly here; use the theta-function form
        let y = -std::f64::consts::PI.powi(2) / (8.0 * x * x);
        let s: f64 = (0..20)
            .map(|j| ((2 * j + 1) as f64).powi(2) * y)
            .map(f64::exp)
            .sum();
        let cdf = (2.0 * std::f64::consts::PI).sqrt() / x * s;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut total = 0.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * x * x).exp();
        total += if j % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * total).clamp(0.0, 1.0)
}

/// Asymptotic critical value `c` with `P(K > c) = alpha`.
pub fn kolmogorov_critical(alpha: f64) -> f64 {
    let (mut lo, mut hi) = (0.2, 5.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_sf(mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// One-sample statistic `sup |F_n - F|`. Sorts `data` in place.
pub fn ks_statistic<F: Fn(f64) -> f64>(data: &mut [f64], cdf: F) -> f64 {
    data.sort_by(f64::total_cmp);
    let n = data.len() as f64;
    data.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Two-sample statistic `sup |F_a - F_b|`. Sorts both slices in place.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic p-value of a one-sample statistic, with Stephens' small-sample correction.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    kolmogorov_sf(d * (sn + 0.12 + 0.11 / sn))
}

/// Asymptotic p-value of a two-sample statistic.
pub fn ks_two_sample_pvalue(d: f64, n: usize, m: usize) -> f64 {
    let ne = (n * m) as f64 / (n + m) as f64;
    ks_pvalue(d, ne.round() as usize)
}

/// Binomial standard error `sqrt(p(1-p)/reps)`.
pub fn binomial_stderr(p: f64, reps: u64) -> f64 {
    (p * (1.0 - p) / reps as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let parts: Vec<Moments> = xs
            .chunks(77)
            .map(|c| {
                let mut m = Moments::default();
                c.iter().for_each(|&x| m.push(x));
                m
            })
            .collect();
        let merged = pairwise_reduce(&parts, &|a: &Moments, b: &Moments| a.merge(b)).unwrap();
        assert_eq!(merged.count(), 1000);
        assert!((merged.mean() - all.mean()).abs() < 1e-12);
        assert!((merged.variance() - all.variance()).abs() < 1e-10);
    }

    #[test]
    fn kolmogorov_reference_values() {
        // standard table: P(K > 1.3581) = 0.05, P(K > 1.6276) = 0.01
        assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_sf(1.6276) - 0.01).abs() < 1e-4);
        assert!((kolmogorov_critical(0.01) - 1.6276).abs() < 1e-3);
        // both branches agree at the switch
        let below = kolmogorov_sf(0.3 - 1e-12);
        let above = kolmogorov_sf(0.3 + 1e-12);
        assert!((below - above).abs() < 1e-9);
    }

    #[test]
    fn ks_of_exact_grid_is_small() {
        let mut xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let d = ks_statistic(&mut xs, |x| x);
        assert!((d - 0.0005).abs() < 1e-12);
        let mut ys = xs.clone();
        assert_eq!(ks_two_sample(&mut xs, &mut ys), 0.0);
        let mut shifted: Vec<f64> = xs.iter().map(|x| x + 0.5).collect();
        assert!((ks_two_sample(&mut xs, &mut shifted) - 0.5).abs() < 1e-2);
    }
}
