//! Spherical (HCIZ) integrals
//! `I_N^{(β)}(A, B, γ) = N⁻² ln ∫ dμ(U) exp((βγ/2) N Tr[U†AUB])`
//! by exact determinants, the Brézin–Hikami pair expansion, tilted Monte
//! Carlo, and closed forms.

mod bh;
mod closed;
mod exact;
mod mc;

pub use bh::{hciz_bh_beta1, hciz_bh_grad, PairConvention, PairFlag};
pub use closed::{hciz_rect_exact, hciz_semicircle_closed};
pub use exact::{hciz_exact_beta2, hciz_grad_exact_beta2, kernel_stabilizer, kernel_weights, Stabilizer};
pub use mc::{hciz_grad_mc, hciz_mc, mc_partial, McGradient, McPartial, MC_CHUNK};

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HcizMethod {
    ExactDet,
    #[serde(rename = "BH")]
    Bh,
    MonteCarlo,
    SemicircleClosed,
    RectExactDet,
}

impl HcizMethod {
    pub fn name(self) -> &'static str {
        match self {
            HcizMethod::ExactDet => "ExactDet",
            HcizMethod::Bh => "BH",
            HcizMethod::MonteCarlo => "MonteCarlo",
            HcizMethod::SemicircleClosed => "SemicircleClosed",
            HcizMethod::RectExactDet => "RectExactDet",
        }
    }

    pub fn is_deterministic(self) -> bool {
        !matches!(self, HcizMethod::MonteCarlo)
    }
}

/// Value of `I_N` with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HcizEstimate {
    pub value: f64,
    /// Zero for deterministic methods.
    pub stderr: f64,
    pub method: HcizMethod,
    pub n: usize,
    /// Pairs violating the BH criterion; `Some` only for BH.
    pub validity: Option<Vec<PairFlag>>,
    /// Conditioning proxy of the kernel matrix (determinant methods).
    pub log_condition: Option<f64>,
    /// Effective sample size of the tilted weights (Monte Carlo).
    pub ess: Option<f64>,
}

impl HcizEstimate {
    pub(crate) fn deterministic(value: f64, method: HcizMethod, n: usize) -> Self {
        HcizEstimate { value, stderr: 0.0, method, n, validity: None, log_condition: None, ess: None }
    }

    pub fn validity_violations(&self) -> usize {
        self.validity.as_ref().map_or(0, |v| v.len())
    }
}

pub(crate) fn check_same_len(a: &[f64], b: &[f64]) -> Result<usize> {
    if a.is_empty() || a.len() != b.len() {
        return Err(Error::InvalidArgument(alloc::format!(
            "spectra must be non-empty with equal lengths ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite spectrum entry".into()));
    }
    Ok(a.len())
}

/// Fails when two entries are closer than `tol`.
pub(crate) fn check_distinct(v: &[f64], tol: f64) -> Result<()> {
    for i in 0..v.len() {
        for j in 0..i {
            let gap = (v[i] - v[j]).abs();
            if gap <= tol {
                return Err(Error::Degenerate { i: j, j: i, gap });
            }
        }
    }
    Ok(())
}

/// `(sign, ln|Δ(v)|)` with `Δ(v) = Π_{i<j} (v_j − v_i)`.
pub(crate) fn log_vandermonde(v: &[f64]) -> (f64, f64) {
    let mut sign = 1.0;
    let mut acc = 0.0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            let d = v[j] - v[i];
            if d < 0.0 {
                sign = -sign;
            }
            acc += crate::math::ln(d.abs());
        }
    }
    (sign, acc)
}
