//! Scalar math helpers: `libm`-backed transcendentals, adaptive quadrature,
//! and a bracketing 1-D maximizer.
//!
//! Everything routes through `libm` rather than the `std` float methods so
//! that the crate works without `std` and produces identical bits everywhere.

/// e^x.
#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

/// e^x - 1, accurate near zero.
#[inline]
pub fn expm1(x: f64) -> f64 {
    libm::expm1(x)
}

/// Natural logarithm.
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

/// ln(1 + x), accurate near zero.
#[inline]
pub fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

/// Square root.
#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

/// Absolute value.
#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance
/// `tol`.
///
/// The integrand is assumed finite on the interval. Recursion stops either
/// when the Richardson error estimate drops below the local tolerance or at
/// depth 52, whichever comes first.
pub fn adaptive_simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(&mut f, a, b, fa, fm, fb, whole, tol, 52)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || abs(delta) <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Integrate `f` over `[a, b]` splitting at the given interior knots, each
/// piece with adaptive Simpson. Knots outside `(a, b)` are ignored.
pub fn quadrature_with_knots<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    knots: &[f64],
    tol: f64,
) -> f64 {
    let mut cuts: alloc::vec::Vec<f64> = knots.iter().copied().filter(|&k| k > a && k < b).collect();
    cuts.sort_by(|x, y| x.total_cmp(y));
    cuts.dedup();
    let pieces = cuts.len() + 1;
    let piece_tol = tol / pieces as f64;
    let mut total = 0.0;
    let mut lo = a;
    for &k in &cuts {
        total += adaptive_simpson(&mut f, lo, k, piece_tol);
        lo = k;
    }
    total += adaptive_simpson(&mut f, lo, b, piece_tol);
    total
}

/// Result of a 1-D maximization.
#[derive(Debug, Clone, Copy)]
pub struct Max1d {
    pub x: f64,
    pub value: f64,
    pub iterations: u32,
    pub converged: bool,
}

/// Maximize a unimodal-ish scalar function by bracket expansion followed by
/// golden-section search with parabolic refinement (Brent-style steps).
///
/// `x0` is the starting point and `step` the initial bracket half-width.
pub fn maximize_scalar<F: FnMut(f64) -> f64>(
    mut f: F,
    x0: f64,
    step: f64,
    tol: f64,
    max_iter: u32,
) -> Max1d {
    // Bracket: find a < b < c with f(b) >= f(a), f(b) >= f(c).
    let mut a = x0 - step;
    let mut b = x0;
    let mut c = x0 + step;
    let mut fa = f(a);
    let mut fb = f(b);
    let mut fc = f(c);
    let mut expansions = 0u32;
    while !(fb >= fa && fb >= fc) && expansions < 80 {
        if fa > fb {
            // Walk left.
            c = b;
            fc = fb;
            b = a;
            fb = fa;
            a = b - 1.6 * (c - b);
            fa = f(a);
        } else {
            // Walk right.
            a = b;
            fa = fb;
            b = c;
            fb = fc;
            c = b + 1.6 * (b - a);
            fc = f(c);
        }
        expansions += 1;
    }

    const GOLD: f64 = 0.381_966_011_250_105;
    let mut iterations = 0u32;
    let mut converged = false;
    while iterations < max_iter {
        if c - a < tol * (1.0 + abs(b)) {
            converged = true;
            break;
        }
        // Parabolic candidate through (a, fa), (b, fb), (c, fc).
        let denom = (b - a) * (fb - fc) - (b - c) * (fb - fa);
        let mut x = if abs(denom) > 1e-300 {
            let num = (b - a) * (b - a) * (fb - fc) - (b - c) * (b - c) * (fb - fa);
            b - 0.5 * num / denom
        } else {
            f64::NAN
        };
        let safe = x.is_finite() && x > a + 0.1 * tol && x < c - 0.1 * tol && abs(x - b) > 1e-14;
        if !safe {
            // Golden-section step into the larger half.
            x = if c - b > b - a { b + GOLD * (c - b) } else { b - GOLD * (b - a) };
        }
        let fx = f(x);
        if fx > fb {
            if x > b {
                a = b;
                fa = fb;
            } else {
                c = b;
                fc = fb;
            }
            b = x;
            fb = fx;
        } else if x > b {
            c = x;
            fc = fx;
        } else {
            a = x;
            fa = fx;
        }
        iterations += 1;
    }
    Max1d { x: b, value: fb, iterations, converged }
}

/// Complementary CDF of the Kolmogorov distribution: Q(z) = P(K > z).
///
/// Uses the theta-function series on both sides of z ~ 0.75 for accuracy over
/// the whole range; probabilities below ~1e-15 round to zero.
pub fn kolmogorov_sf(z: f64) -> f64 {
    if !z.is_finite() || z <= 0.0 {
        return 1.0;
    }
    if z < 0.04 {
        return 1.0;
    }
    if z < 0.755 {
        // Q(z) = 1 - sqrt(2 pi)/z * sum_{k odd} exp(-k^2 pi^2 / (8 z^2))
        let v = core::f64::consts::PI * core::f64::consts::PI / (8.0 * z * z);
        let sum = exp(-v) + exp(-9.0 * v) + exp(-25.0 * v) + exp(-49.0 * v);
        let p = sqrt(2.0 * core::f64::consts::PI) / z * sum;
        (1.0 - p).clamp(0.0, 1.0)
    } else {
        // Q(z) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 z^2)
        let mut sum = 0.0;
        let mut sign = 1.0;
        for k in 1..=100 {
            let term = exp(-2.0 * (k as f64) * (k as f64) * z * z);
            sum += sign * term;
            sign = -sign;
            if term < 1e-18 {
                break;
            }
        }
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_polynomial_exactly() {
        // Simpson is exact for cubics.
        let v = adaptive_simpson(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 1e-12);
        assert!((v - (4.0 - 4.0 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn simpson_exponential() {
        let v = adaptive_simpson(exp, 0.0, 1.0, 1e-12);
        assert!((v - (core::f64::consts::E - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn knotted_quadrature_handles_kinks() {
        // |x - 0.3| has a kink; splitting at the knot makes it easy.
        let f = |x: f64| abs(x - 0.3);
        let v = quadrature_with_knots(f, 0.0, 1.0, &[0.3], 1e-12);
        let exact = 0.3 * 0.3 / 2.0 + 0.7 * 0.7 / 2.0;
        assert!((v - exact).abs() < 1e-10);
    }

    #[test]
    fn maximize_quadratic() {
        let r = maximize_scalar(|x| -(x - 1.7) * (x - 1.7) + 3.0, 0.0, 1.0, 1e-10, 200);
        assert!(r.converged);
        assert!((r.x - 1.7).abs() < 1e-7);
        assert!((r.value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn kolmogorov_reference_values() {
        // Values of the Kolmogorov distribution from the defining series.
        assert!((kolmogorov_sf(1.0) - 0.2699996717).abs() < 1e-8);
        assert!((kolmogorov_sf(1.36) - 0.0494858768).abs() < 1e-8);
        assert!((kolmogorov_sf(0.5) - 0.9639452437).abs() < 1e-8);
        assert!(kolmogorov_sf(0.05) > 0.999999);
        assert!(kolmogorov_sf(3.0) < 1e-7);
        // Continuity across the branch switch at z = 0.755 (|Q'| < 2 there).
        let lo = kolmogorov_sf(0.754999);
        let hi = kolmogorov_sf(0.755001);
        assert!((lo - hi).abs() < 1e-5);
    }
}
