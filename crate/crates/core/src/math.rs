//! Scalar helpers. Everything goes through `libm` so results do not depend on
//! whether the host links `std`.

use alloc::vec;
use alloc::vec::Vec;

pub use core::f64::consts::{LN_2, PI};

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}
#[inline]
pub fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}
#[inline]
pub fn exp_m1(x: f64) -> f64 {
    libm::expm1(x)
}
#[inline]
pub fn powi(x: f64, n: i32) -> f64 {
    libm::pow(x, n as f64)
}
#[inline]
pub fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}
#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}
#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}
#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}
#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

/// ln k! by direct summation (exact enough for the sizes used here).
pub fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|j| ln(j as f64)).sum()
}

/// ln Π_{k=0}^{n-1} k!
pub fn ln_superfactorial(n: usize) -> f64 {
    // j divides k! for k = j..n-1, i.e. n - j times.
    (1..n).map(|j| (n - j) as f64 * ln(j as f64)).sum()
}

/// ln Σ exp(x_i) with max-shift.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + ln(xs.iter().map(|&x| exp(x - m)).sum::<f64>())
}

/// ln |e^a − e^b|, stable for large exponents.
pub fn log_diff_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    let d = lo - hi;
    if d > -LN_2 {
        hi + ln(-exp_m1(d))
    } else {
        hi + ln_1p(-exp(d))
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1] via Newton on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut z = cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    (
        x.iter().map(|t| c + h * t).collect(),
        w.iter().map(|v| v * h).collect(),
    )
}

/// Exponentially scaled modified Bessel function e^{-|x|} I₀(x).
pub fn bessel_i0e(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= 30.0 {
        // Power series Σ (x²/4)^k / (k!)², terms all positive.
        let q = 0.25 * ax * ax;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        while term > 1e-17 * sum {
            term *= q / (k * k);
            sum += term;
            k += 1.0;
        }
        sum * exp(-ax)
    } else {
        // Hankel asymptotic series, coefficients ((2k-1)!!)² / (k! 8^k x^k).
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..30 {
            let a = (2 * k - 1) as f64;
            let next = term * a * a / (k as f64 * 8.0 * ax);
            if next.abs() > term.abs() {
                break;
            }
            term = next;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        sum / sqrt(2.0 * PI * ax)
    }
}

/// ln I₀(x) without overflow.
pub fn ln_bessel_i0(x: f64) -> f64 {
    x.abs() + ln(bessel_i0e(x))
}

/// Mean of a slice.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// N⁻¹ Σ x_i^k.
pub fn moment(xs: &[f64], k: u32) -> f64 {
    xs.iter().map(|&x| powi(x, k as i32)).sum::<f64>() / xs.len() as f64
}

/// Composite trapezoid rule on a (possibly non-uniform) grid.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn superfactorial_matches_direct_sum() {
        for n in 1..12 {
            let direct: f64 = (0..n).map(ln_factorial).sum();
            assert!((ln_superfactorial(n) - direct).abs() < 1e-10);
        }
    }

    #[test]
    fn log_diff_exp_cases() {
        let v = log_diff_exp(3.0, 1.0);
        assert!((v - ln(exp(3.0) - exp(1.0))).abs() < 1e-14);
        // 4.5 and 1004.5 are exact, so both differences are exactly 0.5
        let v = log_diff_exp(5.0, 4.5);
        assert!((v - ln(exp(5.0) - exp(4.5))).abs() < 1e-13);
        // shift invariance far beyond overflow
        assert!((log_diff_exp(1005.0, 1004.5) - 1000.0 - v).abs() < 1e-12);
        assert_eq!(log_diff_exp(2.0, 5.0), log_diff_exp(5.0, 2.0));
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(12);
        for p in 0..24 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * powi(*x, p)).sum();
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-13, "p={p} q={q}");
        }
        let (x, w) = gauss_legendre(7);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14 && x[3].abs() < 1e-15);
    }

    #[test]
    fn bessel_against_integral_representation() {
        // I₀(x) = (1/π)∫₀^π exp(x cos θ) dθ
        let (t, w) = gauss_legendre_on(80, 0.0, PI);
        for &x in &[0.0, 0.3, 1.0, 5.0, 29.0, 31.0, 60.0] {
            let q: f64 = t.iter().zip(&w).map(|(t, w)| w * exp(x * (cos(*t) - 1.0))).sum::<f64>() / PI;
            let rel = (bessel_i0e(x) - q).abs() / q;
            assert!(rel < 1e-12, "x={x} rel={rel}");
        }
        assert_eq!(bessel_i0e(0.0), 1.0);
        assert!((ln_bessel_i0(1e4) - (1e4 - 0.5 * ln(2.0 * PI * 1e4))).abs() < 1e-4);
    }

    #[test]
    fn log_sum_exp_shift() {
        let v = log_sum_exp(&[1000.0, 1000.0]);
        assert!((v - 1000.0 - LN_2).abs() < 1e-12);
    }
}
