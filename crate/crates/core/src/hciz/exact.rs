//! Exact β = 2 evaluation through the generalized Vandermonde determinant
//! `det[exp(t a_i b_j)]`, `t = γN`.

use alloc::vec::Vec;

use super::{check_distinct, check_same_len, log_vandermonde, HcizEstimate, HcizMethod};
use crate::error::{Error, Result};
use crate::linalg::{self, RMatrix};
use crate::math;

/// Exponent shift `m` subtracted inside the kernel `exp N(√λ s_i y_j − m)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Stabilizer {
    /// `m = N⁻² Σ_ij m_ij`.
    Mean,
    /// `m = ρ max m_ij + (1 − ρ) min m_ij`.
    Mix(f64),
}

impl Default for Stabilizer {
    fn default() -> Self {
        Stabilizer::Mix(0.5)
    }
}

/// `m` for `m_ij = √λ s_i y_j`.
pub fn kernel_stabilizer(lam_s: &[f64], lam_y: &[f64], lambda: f64, stab: Stabilizer) -> f64 {
    let sl = math::sqrt(lambda);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for s in lam_s {
        for y in lam_y {
            let v = sl * s * y;
            lo = lo.min(v);
            hi = hi.max(v);
            sum += v;
        }
    }
    match stab {
        Stabilizer::Mean => sum / (lam_s.len() * lam_y.len()) as f64,
        Stabilizer::Mix(rho) => rho * hi + (1.0 - rho) * lo,
    }
}

/// Exponent matrix with row then column maxima removed; returns the matrix of
/// `exp` values and the total shift added back to `ln det`.
fn equilibrated_kernel(expo: &RMatrix) -> (RMatrix, f64) {
    let n = expo.nrows();
    let mut e = expo.clone();
    let mut shift = 0.0;
    for i in 0..n {
        let r = e.row(i).max();
        shift += r;
        for j in 0..n {
            e[(i, j)] -= r;
        }
    }
    for j in 0..n {
        let c = e.column(j).max();
        shift += c;
        for i in 0..n {
            e[(i, j)] -= c;
        }
    }
    (e.map(math::exp), shift)
}

/// `I_N^{(2)}(A, B, γ)` from the determinant formula, in log-domain.
///
/// Both spectra are centered first (the shift contributes `γ θ₁^A θ₁^B`) and
/// sorted, which makes the kernel totally positive for `γ > 0`.
pub fn hciz_exact_beta2(lam_a: &[f64], lam_b: &[f64], gamma: f64) -> Result<HcizEstimate> {
    let n = check_same_len(lam_a, lam_b)?;
    if !gamma.is_finite() {
        return Err(Error::InvalidArgument("gamma must be finite".into()));
    }
    if gamma == 0.0 {
        return Ok(HcizEstimate::deterministic(0.0, HcizMethod::ExactDet, n));
    }
    if n == 1 {
        return Ok(HcizEstimate::deterministic(gamma * lam_a[0] * lam_b[0], HcizMethod::ExactDet, 1));
    }
    check_distinct(lam_a, 1e-12)?;
    check_distinct(lam_b, 1e-12)?;

    let ta = math::mean(lam_a);
    let tb = math::mean(lam_b);
    let flip = if gamma < 0.0 { -1.0 } else { 1.0 };
    let mut a: Vec<f64> = lam_a.iter().map(|x| flip * (x - ta)).collect();
    let mut b: Vec<f64> = lam_b.iter().map(|x| x - tb).collect();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let g = gamma.abs();
    let nf = n as f64;
    let t = g * nf;

    let expo = RMatrix::from_fn(n, n, |i, j| t * a[i] * b[j]);
    let (k, shift) = equilibrated_kernel(&expo);
    let det = linalg::log_det(&k)?;
    let (sa, la) = log_vandermonde(&a);
    let (sb, lb) = log_vandermonde(&b);
    if det.sign * sa * sb < 0.0 {
        return Err(Error::Breakdown(alloc::format!(
            "negative determinant ratio at N = {n} (log-condition {:.1}); use a smaller N or the Monte-Carlo backend",
            det.log_cond
        )));
    }
    let log_ratio = det.log_abs + shift - la - lb;
    let pairs = nf * (nf - 1.0) / 2.0;
    let value = (math::ln_superfactorial(n) - pairs * math::ln(t) + log_ratio) / (nf * nf) + gamma * ta * tb;
    if !value.is_finite() {
        return Err(Error::Breakdown("non-finite spherical integral".into()));
    }
    let mut est = HcizEstimate::deterministic(value, HcizMethod::ExactDet, n);
    est.log_condition = Some(det.log_cond);
    Ok(est)
}

/// Weights `W_ij = (K⁻¹)_{ji} K_ij` of the kernel `K_ij = exp N(√λ s_i y_j − m)`.
///
/// Rows and columns of `W` sum to one. Any row or column rescaling of `K`
/// leaves `W` unchanged, so `stab` only affects round-off.
pub fn kernel_weights(lam_s: &[f64], lam_y: &[f64], lambda: f64, stab: Stabilizer) -> Result<RMatrix> {
    let n = check_same_len(lam_s, lam_y)?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument("lambda must be positive".into()));
    }
    if n == 1 {
        return Ok(RMatrix::from_element(1, 1, 1.0));
    }
    check_distinct(lam_s, 1e-12)?;
    check_distinct(lam_y, 1e-12)?;
    let sl = math::sqrt(lambda);
    let nf = n as f64;
    let m = kernel_stabilizer(lam_s, lam_y, lambda, stab);
    let expo = RMatrix::from_fn(n, n, |i, j| nf * (sl * lam_s[i] * lam_y[j] - m));
    let (k, _) = equilibrated_kernel(&expo);
    let inv = linalg::inverse(&k).map_err(|_| Error::Singular {
        log_cond: linalg::log_det(&k).map(|d| d.log_cond).unwrap_or(f64::INFINITY),
    })?;
    let w = RMatrix::from_fn(n, n, |i, j| inv[(j, i)] * k[(i, j)]);
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular { log_cond: f64::INFINITY });
    }
    Ok(w)
}

/// Kernel part of `N ∂I/∂λ_i^s` at `γ = √λ`:
/// `Σ_j (K⁻¹)_{ji} √λ y_j K_ij` with `K_ij = exp N(√λ s_i y_j − m)`.
///
/// Equals `N ∂I/∂λ_i^s + R_i`.
pub fn hciz_grad_exact_beta2(lam_s: &[f64], lam_y: &[f64], lambda: f64, stab: Stabilizer) -> Result<Vec<f64>> {
    let n = check_same_len(lam_s, lam_y)?;
    let w = kernel_weights(lam_s, lam_y, lambda, stab)?;
    let sl = math::sqrt(lambda);
    Ok((0..n).map(|i| (0..n).map(|j| w[(i, j)] * sl * lam_y[j]).sum()).collect())
}
