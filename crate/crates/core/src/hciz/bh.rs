//! Brézin–Hikami pair expansion of the real (β = 1) spherical integral at
//! `γ = √λ`:
//! `I ≈ (√λ/2N) Σ s_i y_i − (c/N²) Σ_{i<j} ln(1 + √λ (s_i − s_j)(y_i − y_j))`
//! with both spectra in descending order.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{check_same_len, HcizEstimate, HcizMethod};
use crate::error::{Error, Result};
use crate::math;

/// Coefficient `c` of the pair sum. The two printed forms of the expansion
/// disagree, so all three readings are available.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum PairConvention {
    /// `c = 1/2`: the original `γ`-form with `γ = √λN/2` substituted. The
    /// linear term then cancels at order `√λ` for centered spectra.
    #[default]
    HalfUpper,
    /// `c = 1`.
    Upper,
    /// `c = 2`, i.e. `(1/N²) Σ_{i≠j}`; its gradient is the printed one.
    All,
}

impl PairConvention {
    pub fn coefficient(self) -> f64 {
        match self {
            PairConvention::HalfUpper => 0.5,
            PairConvention::Upper => 1.0,
            PairConvention::All => 2.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PairConvention::HalfUpper => "half-upper (1/2N^2) sum_{i<j}",
            PairConvention::Upper => "upper (1/N^2) sum_{i<j}",
            PairConvention::All => "all (1/N^2) sum_{i!=j}",
        }
    }
}

/// A pair with `√λ Δs Δy ≥ 1`, outside the expansion's validity range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairFlag {
    pub i: usize,
    pub j: usize,
    pub product: f64,
}

fn is_descending(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] >= w[1])
}

/// BH value with validity flags. Flagged pairs do not abort the evaluation.
pub fn hciz_bh_beta1(lam_s: &[f64], lam_y: &[f64], lambda: f64, conv: PairConvention) -> Result<HcizEstimate> {
    let n = check_same_len(lam_s, lam_y)?;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument("lambda must be finite and >= 0".into()));
    }
    if !is_descending(lam_s) || !is_descending(lam_y) {
        return Err(Error::InvalidArgument("Brezin-Hikami needs both spectra in descending order".into()));
    }
    let mut est = HcizEstimate::deterministic(0.0, HcizMethod::Bh, n);
    est.validity = Some(Vec::new());
    if lambda == 0.0 {
        return Ok(est);
    }
    let sl = math::sqrt(lambda);
    let nf = n as f64;
    let linear: f64 = lam_s.iter().zip(lam_y).map(|(s, y)| s * y).sum::<f64>() * sl / (2.0 * nf);
    let mut pair = 0.0;
    let mut flags = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let x = sl * (lam_s[i] - lam_s[j]) * (lam_y[i] - lam_y[j]);
            if x >= 1.0 {
                flags.push(PairFlag { i, j, product: x });
            }
            pair += math::ln_1p(x);
        }
    }
    est.value = linear - conv.coefficient() * pair / (nf * nf);
    est.validity = Some(flags);
    Ok(est)
}

/// `−N ∂I_BH/∂s_i = (c√λ/N) Σ_{j≠i} (y_i − y_j)/(1 + √λ(s_i − s_j)(y_i − y_j)) − (√λ/2) y_i`.
///
/// The population need not be sorted here; the caller is responsible for
/// pairing `s_i` with `y_i` in the BH order.
pub fn hciz_bh_grad(lam_s: &[f64], lam_y: &[f64], lambda: f64, conv: PairConvention) -> Result<Vec<f64>> {
    let n = check_same_len(lam_s, lam_y)?;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument("lambda must be finite and >= 0".into()));
    }
    let sl = math::sqrt(lambda);
    let c = conv.coefficient() * sl / n as f64;
    let mut out = alloc::vec![0.0; n];
    for i in 0..n {
        let mut acc = 0.0;
        for j in 0..n {
            if j == i {
                continue;
            }
            let dy = lam_y[i] - lam_y[j];
            let den = 1.0 + sl * (lam_s[i] - lam_s[j]) * dy;
            if den <= 0.0 {
                return Err(Error::Breakdown(alloc::format!(
                    "Brezin-Hikami denominator {den:e} <= 0 for pair ({i}, {j})"
                )));
            }
            acc += dy / den;
        }
        out[i] = c * acc - 0.5 * sl * lam_y[i];
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spectra() -> (Vec<f64>, Vec<f64>) {
        let s = alloc::vec![1.7, 1.1, 0.6, 0.2, -0.1, -0.5, -1.2, -1.9];
        let y = alloc::vec![2.1, 1.3, 0.9, 0.1, -0.3, -0.8, -1.0, -2.2];
        (s, y)
    }

    #[test]
    fn zero_lambda() {
        let (s, y) = spectra();
        let e = hciz_bh_beta1(&s, &y, 0.0, PairConvention::default()).unwrap();
        assert_eq!(e.value, 0.0);
        assert!(hciz_bh_grad(&s, &y, 0.0, PairConvention::All).unwrap().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let (s, y) = spectra();
        let n = s.len() as f64;
        let h = 1e-6;
        for conv in [PairConvention::HalfUpper, PairConvention::Upper, PairConvention::All] {
            let g = hciz_bh_grad(&s, &y, 0.01, conv).unwrap();
            for i in 0..s.len() {
                let mut p = s.clone();
                let mut q = s.clone();
                p[i] += h;
                q[i] -= h;
                // small steps keep the descending order
                let fd = (hciz_bh_beta1(&p, &y, 0.01, conv).unwrap().value
                    - hciz_bh_beta1(&q, &y, 0.01, conv).unwrap().value)
                    / (2.0 * h);
                let want = -n * fd;
                assert!((g[i] - want).abs() < 1e-5 * want.abs().max(1e-3), "{conv:?} i={i}");
            }
        }
    }

    #[test]
    fn validity_flag_and_symmetry() {
        let s = [1.0, -1.0];
        let y = [0.75, -0.75];
        // pair product √λ · 2 · 1.5 = 1.5 at √λ = 0.5
        let e = hciz_bh_beta1(&s, &y, 0.25, PairConvention::default()).unwrap();
        let flags = e.validity.unwrap();
        assert_eq!(flags.len(), 1);
        assert!((flags[0].product - 1.5).abs() < 1e-15);
        let a = hciz_bh_beta1(&s, &y, 0.1, PairConvention::Upper).unwrap().value;
        let b = hciz_bh_beta1(&y, &s, 0.1, PairConvention::Upper).unwrap().value;
        assert!((a - b).abs() < 1e-15);
        assert!(hciz_bh_beta1(&[-1.0, 1.0], &y, 0.1, PairConvention::Upper).is_err());
    }

    #[test]
    fn joint_swap_permutes_gradient() {
        let (s, y) = spectra();
        let g = hciz_bh_grad(&s, &y, 0.02, PairConvention::All).unwrap();
        let (mut s2, mut y2) = (s.clone(), y.clone());
        s2.swap(2, 5);
        y2.swap(2, 5);
        let g2 = hciz_bh_grad(&s2, &y2, 0.02, PairConvention::All).unwrap();
        assert!((g[2] - g2[5]).abs() < 1e-15 && (g[5] - g2[2]).abs() < 1e-15);
    }
}
