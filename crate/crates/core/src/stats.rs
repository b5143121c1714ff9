//! Statistical utilities: KS tests, ECDF evaluation, summary statistics.

use alloc::vec::Vec;

use crate::math;

/// Exp(1) cumulative distribution function.
#[inline]
pub fn exp1_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -math::expm1(-x)
    }
}

/// Exp(1) quantile function.
#[inline]
pub fn exp1_quantile(p: f64) -> f64 {
    -math::ln_1p(-p)
}

/// One-sample Kolmogorov-Smirnov statistic against a caller-supplied CDF.
///
/// Returns (D, n). The sample need not be sorted.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> (f64, usize) {
    let mut xs: Vec<f64> = sample.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    let nf = n as f64;
    let mut d = 0.0_f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        let lo = math::abs(f - i as f64 / nf);
        let hi = math::abs((i + 1) as f64 / nf - f);
        d = d.max(lo).max(hi);
    }
    (d, n)
}

/// Asymptotic one-sample KS p-value with the Stephens small-sample
/// correction: Q_K((sqrt(n) + 0.12 + 0.11/sqrt(n)) D).
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let sn = math::sqrt(n as f64);
    math::kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d)
}

/// Two-sample Kolmogorov-Smirnov test. Returns (D, p).
///
/// The p-value uses the asymptotic Kolmogorov distribution with effective
/// sample size n*m/(n+m); for discrete data it is conservative.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut xs: Vec<f64> = a.to_vec();
    let mut ys: Vec<f64> = b.to_vec();
    xs.sort_by(|u, v| u.total_cmp(v));
    ys.sort_by(|u, v| u.total_cmp(v));
    let (n, m) = (xs.len(), ys.len());
    if n == 0 || m == 0 {
        return (0.0, 1.0);
    }
    let mut i = 0;
    let mut j = 0;
    let mut d = 0.0_f64;
    while i < n && j < m {
        let v = xs[i].min(ys[j]);
        while i < n && xs[i] <= v {
            i += 1;
        }
        while j < m && ys[j] <= v {
            j += 1;
        }
        d = d.max(math::abs(i as f64 / n as f64 - j as f64 / m as f64));
    }
    let ne = (n as f64 * m as f64) / (n as f64 + m as f64);
    let sn = math::sqrt(ne);
    let p = math::kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
    (d, p)
}

/// Empirical CDF of `sample` evaluated at each grid point (sample unsorted).
pub fn ecdf_on_grid(sample: &[f64], grid: &[f64]) -> Vec<f64> {
    let mut xs: Vec<f64> = sample.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    grid.iter()
        .map(|&g| {
            if n == 0 {
                return 0.0;
            }
            let k = xs.partition_point(|&x| x <= g);
            k as f64 / n as f64
        })
        .collect()
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Linear-interpolation quantile of an unsorted sample, p in [0, 1].
pub fn quantile(xs: &[f64], p: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v: Vec<f64> = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let h = p * (v.len() - 1) as f64;
    let lo = h as usize;
    let hi = (lo + 1).min(v.len() - 1);
    let frac = h - lo as f64;
    v[lo] + frac * (v[hi] - v[lo])
}

/// Pearson correlation of paired samples. NaN when undefined.
pub fn pearson_correlation(xs: &[f64], ys: &[f64]) -> f64 {
    if xs.len() != ys.len() || xs.len() < 2 {
        return f64::NAN;
    }
    let mx = mean(xs);
    let my = mean(ys);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return f64::NAN;
    }
    sxy / math::sqrt(sxx * syy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn ks_statistic_degenerate_zeros() {
        let gaps = [0.0, 0.0, 0.0];
        let (d, _) = ks_statistic(&gaps, exp1_cdf);
        assert_eq!(d, 1.0);
    }

    #[test]
    fn ks_accepts_true_exponential() {
        let mut rng = Rng::from_seed(11);
        let sample: Vec<f64> = (0..2000).map(|_| rng.exp1()).collect();
        let (d, n) = ks_statistic(&sample, exp1_cdf);
        let p = ks_p_value(d, n);
        assert!(p > 0.01, "p = {p}");
    }

    #[test]
    fn ks_rejects_wrong_rate() {
        let mut rng = Rng::from_seed(12);
        // Exp(2) gaps tested against Exp(1).
        let sample: Vec<f64> = (0..500).map(|_| rng.exp1() / 2.0).collect();
        let (d, n) = ks_statistic(&sample, exp1_cdf);
        let p = ks_p_value(d, n);
        assert!(p < 1e-6, "p = {p}");
    }

    #[test]
    fn two_sample_same_distribution() {
        let mut rng = Rng::from_seed(13);
        let a: Vec<f64> = (0..1500).map(|_| rng.exp1()).collect();
        let b: Vec<f64> = (0..1500).map(|_| rng.exp1()).collect();
        let (_, p) = ks_two_sample(&a, &b);
        assert!(p > 0.01, "p = {p}");
    }

    #[test]
    fn two_sample_detects_shift() {
        let mut rng = Rng::from_seed(14);
        let a: Vec<f64> = (0..800).map(|_| rng.exp1()).collect();
        let b: Vec<f64> = (0..800).map(|_| rng.exp1() + 0.5).collect();
        let (_, p) = ks_two_sample(&a, &b);
        assert!(p < 1e-6, "p = {p}");
    }

    #[test]
    fn quantiles_and_moments() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(mean(&xs), 3.0);
        assert_eq!(quantile(&xs, 0.5), 3.0);
        assert_eq!(quantile(&xs, 0.0), 1.0);
        assert_eq!(quantile(&xs, 1.0), 5.0);
        assert_eq!(quantile(&xs, 0.25), 2.0);
    }

    #[test]
    fn correlation_signs() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [2.0, 4.0, 6.0, 8.1];
        assert!(pearson_correlation(&xs, &ys) > 0.99);
        let yneg = [5.0, 4.0, 3.0, 1.9];
        assert!(pearson_correlation(&xs, &yneg) < -0.99);
    }

    #[test]
    fn ecdf_grid_values() {
        let s = [1.0, 2.0, 3.0];
        let g = [0.5, 1.0, 2.5, 10.0];
        let e = ecdf_on_grid(&s, &g);
        assert_eq!(e, alloc::vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]);
    }
}
