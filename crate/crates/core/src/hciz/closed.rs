//! Closed forms: two semicircles, and the bi-unitary (singular value)
//! integral `M⁻² ln ∫∫ dU dV exp(γM Re Tr[A U B V])` over `U(M) × U(M)`.

use alloc::vec::Vec;

use super::{check_distinct, check_same_len, log_vandermonde, HcizEstimate, HcizMethod};
use crate::ensembles::Beta;
use crate::error::{Error, Result};
use crate::linalg::{self, RMatrix};
use crate::math;

/// Asymptotic `I^{(β)}` between a semicircle of variance 1 and the data
/// semicircle of variance `1 + λ` at `γ = √λ`:
/// `½(√(4σ⁴+1) − 1 − ln(1 + √(4σ⁴+1)) + ln 2)` with `σ⁴ = λ(1+λ)`, halved for
/// `β = 1`.
pub fn hciz_semicircle_closed(lambda: f64, beta: Beta) -> Result<HcizEstimate> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument("lambda must be finite and >= 0".into()));
    }
    let s4 = lambda * (1.0 + lambda);
    let r = math::sqrt(4.0 * s4 + 1.0);
    // r − 1 and ln(1+r) − ln 2 written to stay exact at λ = 0
    let v2 = 0.5 * ((r - 1.0) - math::ln_1p((r - 1.0) / 2.0));
    let value = match beta {
        Beta::Complex => v2,
        Beta::Real => 0.5 * v2,
    };
    Ok(HcizEstimate::deterministic(value, HcizMethod::SemicircleClosed, 0))
}

/// Bessel-determinant formula for the bi-unitary integral of two `M×M`
/// matrices with singular values `σ^A`, `σ^B`:
///
/// `2^{M(M−1)} (Π_{k<M} k!)² / (Mγ)^{M(M−1)} · det[I₀(Mγ σ_i^A σ_j^B)] / (Δ((σ^A)²) Δ((σ^B)²))`.
///
/// The normalization is fixed so that the left side is an average over two
/// Haar unitaries; see the crate README for the constant.
pub fn hciz_rect_exact(sig_a: &[f64], sig_b: &[f64], gamma: f64) -> Result<HcizEstimate> {
    let m = check_same_len(sig_a, sig_b)?;
    if sig_a.iter().chain(sig_b).any(|&s| s < 0.0) {
        return Err(Error::InvalidArgument("singular values must be non-negative".into()));
    }
    if !gamma.is_finite() {
        return Err(Error::InvalidArgument("gamma must be finite".into()));
    }
    if gamma == 0.0 {
        return Ok(HcizEstimate::deterministic(0.0, HcizMethod::RectExactDet, m));
    }
    // I₀ is even and the Haar measure is invariant under U → −U.
    let g = gamma.abs();
    let mf = m as f64;
    if m == 1 {
        let v = math::ln_bessel_i0(g * sig_a[0] * sig_b[0]);
        return Ok(HcizEstimate::deterministic(v, HcizMethod::RectExactDet, 1));
    }
    let mut a: Vec<f64> = sig_a.to_vec();
    let mut b: Vec<f64> = sig_b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let a2: Vec<f64> = a.iter().map(|x| x * x).collect();
    let b2: Vec<f64> = b.iter().map(|x| x * x).collect();
    check_distinct(&a2, 1e-12)?;
    check_distinct(&b2, 1e-12)?;

    let mut e = RMatrix::from_fn(m, m, |i, j| math::ln_bessel_i0(mf * g * a[i] * b[j]));
    let mut shift = 0.0;
    for i in 0..m {
        let r = e.row(i).max();
        shift += r;
        for j in 0..m {
            e[(i, j)] -= r;
        }
    }
    let det = linalg::log_det(&e.map(math::exp))?;
    let (sa, la) = log_vandermonde(&a2);
    let (sb, lb) = log_vandermonde(&b2);
    if det.sign * sa * sb < 0.0 {
        return Err(Error::Breakdown(alloc::format!(
            "negative Bessel determinant ratio at M = {m} (log-condition {:.1})",
            det.log_cond
        )));
    }
    let pairs = mf * (mf - 1.0);
    let log_pref = pairs * math::LN_2 + 2.0 * math::ln_superfactorial(m) - pairs * math::ln(mf * g);
    let value = (log_pref + det.log_abs + shift - la - lb) / (mf * mf);
    let mut est = HcizEstimate::deterministic(value, HcizMethod::RectExactDet, m);
    est.log_condition = Some(det.log_cond);
    Ok(est)
}
