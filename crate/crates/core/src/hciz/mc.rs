//! Tilted Monte-Carlo estimate of the spherical integral and of its gradient
//! from i.i.d. Haar samples.
//!
//! Sample `k` always uses RNG stream `k` under the root seed, and samples are
//! reduced in fixed chunks of [`MC_CHUNK`] merged in index order. The result is
//! therefore the same whether chunks run serially or on a thread pool.

use alloc::vec;
use alloc::vec::Vec;

use super::{check_same_len, HcizEstimate, HcizMethod};
use crate::ensembles::{sample_orthogonal, sample_unitary, Beta};
use crate::error::{Error, Result};
use crate::math;
use crate::rng;

pub const MC_CHUNK: usize = 1024;

/// Running sums of tilted weights `w_k = exp(f_k − fmax)` over a block of
/// samples.
#[derive(Debug, Clone, PartialEq)]
pub struct McPartial {
    pub count: usize,
    pub fmax: f64,
    pub sw: f64,
    pub sw2: f64,
    /// Σ w g_k, Σ w² g_k, Σ w² g_k² (empty unless gradients were requested).
    pub swg: Vec<f64>,
    pub sw2g: Vec<f64>,
    pub sw2g2: Vec<f64>,
}

/// Self-normalized gradient estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct McGradient {
    pub grad: Vec<f64>,
    pub stderr: Vec<f64>,
    pub ess: f64,
    /// Effective sample size below 10.
    pub low_ess: bool,
}

impl McPartial {
    pub fn empty(n: usize, with_grad: bool) -> Self {
        let m = if with_grad { n } else { 0 };
        McPartial {
            count: 0,
            fmax: f64::NEG_INFINITY,
            sw: 0.0,
            sw2: 0.0,
            swg: vec![0.0; m],
            sw2g: vec![0.0; m],
            sw2g2: vec![0.0; m],
        }
    }

    fn rescale(&mut self, fmax: f64) {
        if self.count == 0 {
            self.fmax = fmax;
            return;
        }
        let s = math::exp(self.fmax - fmax);
        let s2 = s * s;
        self.sw *= s;
        self.sw2 *= s2;
        self.swg.iter_mut().for_each(|v| *v *= s);
        self.sw2g.iter_mut().for_each(|v| *v *= s2);
        self.sw2g2.iter_mut().for_each(|v| *v *= s2);
        self.fmax = fmax;
    }

    /// Combine with the next block (order matters for bit-reproducibility).
    pub fn merge(mut self, mut other: McPartial) -> McPartial {
        if other.count == 0 {
            return self;
        }
        if self.count == 0 {
            return other;
        }
        let m = self.fmax.max(other.fmax);
        self.rescale(m);
        other.rescale(m);
        self.count += other.count;
        self.sw += other.sw;
        self.sw2 += other.sw2;
        for (a, b) in self.swg.iter_mut().zip(&other.swg) {
            *a += b;
        }
        for (a, b) in self.sw2g.iter_mut().zip(&other.sw2g) {
            *a += b;
        }
        for (a, b) in self.sw2g2.iter_mut().zip(&other.sw2g2) {
            *a += b;
        }
        self
    }

    /// `I ≈ (fmax + ln mean w)/N²` with a delta-method standard error.
    pub fn estimate(&self, n: usize) -> HcizEstimate {
        let k = self.count as f64;
        let n2 = (n * n) as f64;
        let mean = self.sw / k;
        let var = (self.sw2 / k - mean * mean).max(0.0) * k / (k - 1.0);
        let stderr = math::sqrt(var / k) / mean / n2;
        HcizEstimate {
            value: (self.fmax + math::ln(mean)) / n2,
            stderr,
            method: HcizMethod::MonteCarlo,
            n,
            validity: None,
            log_condition: None,
            ess: Some(self.sw * self.sw / self.sw2),
        }
    }

    /// `∂I/∂λ_j^A ≈ (βγ/2N) Σ_k w_k g_kj / Σ_k w_k`, `g_kj = Σ_i |U_ji|² λ_i^B`.
    pub fn gradient(&self, gamma: f64, beta: Beta) -> McGradient {
        let n = self.swg.len();
        let c = beta.value() * gamma / (2.0 * n as f64);
        let mut grad = Vec::with_capacity(n);
        let mut stderr = Vec::with_capacity(n);
        for j in 0..n {
            let g = self.swg[j] / self.sw;
            // Σ w²(g_k − ĝ)² expanded
            let v = (self.sw2g2[j] - 2.0 * g * self.sw2g[j] + g * g * self.sw2).max(0.0);
            grad.push(c * g);
            stderr.push(c.abs() * math::sqrt(v) / self.sw);
        }
        let ess = self.sw * self.sw / self.sw2;
        McGradient { grad, stderr, ess, low_ess: ess < 10.0 }
    }
}

/// `|U_ji|²` for one Haar sample drawn from stream `index`.
fn haar_weights(n: usize, beta: Beta, seed: u64, index: u64, out: &mut [f64]) {
    let mut r = rng::stream(seed, index);
    match beta {
        Beta::Real => {
            let u = sample_orthogonal(n, &mut r);
            for j in 0..n {
                for i in 0..n {
                    out[j * n + i] = u[(j, i)] * u[(j, i)];
                }
            }
        }
        Beta::Complex => {
            let u = sample_unitary(n, &mut r);
            for j in 0..n {
                for i in 0..n {
                    out[j * n + i] = u[(j, i)].norm_sqr();
                }
            }
        }
    }
}

/// Accumulate samples `chunk·MC_CHUNK .. min((chunk+1)·MC_CHUNK, k_total)`.
#[allow(clippy::too_many_arguments)]
pub fn mc_partial(
    lam_a: &[f64],
    lam_b: &[f64],
    gamma: f64,
    beta: Beta,
    seed: u64,
    chunk: usize,
    k_total: usize,
    with_grad: bool,
) -> McPartial {
    let n = lam_a.len();
    let lo = chunk * MC_CHUNK;
    let hi = ((chunk + 1) * MC_CHUNK).min(k_total);
    let scale = 0.5 * beta.value() * gamma * n as f64;
    let mut p = vec![0.0; n * n];
    let mut fs = Vec::with_capacity(hi.saturating_sub(lo));
    let mut gs = Vec::with_capacity(if with_grad { (hi.saturating_sub(lo)) * n } else { 0 });
    for k in lo..hi {
        haar_weights(n, beta, seed, k as u64, &mut p);
        let mut f = 0.0;
        for j in 0..n {
            let mut gj = 0.0;
            for i in 0..n {
                gj += p[j * n + i] * lam_b[i];
            }
            f += lam_a[j] * gj;
            if with_grad {
                gs.push(gj);
            }
        }
        fs.push(scale * f);
    }
    let mut acc = McPartial::empty(n, with_grad);
    if fs.is_empty() {
        return acc;
    }
    acc.fmax = fs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    acc.count = fs.len();
    for (k, f) in fs.iter().enumerate() {
        let w = math::exp(f - acc.fmax);
        acc.sw += w;
        acc.sw2 += w * w;
        if with_grad {
            for j in 0..n {
                let g = gs[k * n + j];
                acc.swg[j] += w * g;
                acc.sw2g[j] += w * w * g;
                acc.sw2g2[j] += w * w * g * g;
            }
        }
    }
    acc
}

fn check_mc(lam_a: &[f64], lam_b: &[f64], gamma: f64, k: usize) -> Result<usize> {
    let n = check_same_len(lam_a, lam_b)?;
    if k < 2 {
        return Err(Error::InvalidArgument("Monte-Carlo needs K >= 2 samples".into()));
    }
    if !gamma.is_finite() {
        return Err(Error::InvalidArgument("gamma must be finite".into()));
    }
    Ok(n)
}

fn run_serial(lam_a: &[f64], lam_b: &[f64], gamma: f64, beta: Beta, k: usize, seed: u64, with_grad: bool) -> McPartial {
    let chunks = k.div_ceil(MC_CHUNK);
    (0..chunks)
        .map(|c| mc_partial(lam_a, lam_b, gamma, beta, seed, c, k, with_grad))
        .fold(McPartial::empty(lam_a.len(), with_grad), McPartial::merge)
}

/// Tilted Monte-Carlo estimate of `I_N^{(β)}(A, B, γ)` from `k` Haar samples.
pub fn hciz_mc(lam_a: &[f64], lam_b: &[f64], gamma: f64, beta: Beta, k: usize, seed: u64) -> Result<HcizEstimate> {
    let n = check_mc(lam_a, lam_b, gamma, k)?;
    let est = run_serial(lam_a, lam_b, gamma, beta, k, seed, false).estimate(n);
    debug_assert!(est.value.is_finite(), "max-tilted weights cannot all underflow");
    Ok(est)
}

/// Tilted Monte-Carlo estimate of `∂I/∂λ_k^A`.
pub fn hciz_grad_mc(lam_a: &[f64], lam_b: &[f64], gamma: f64, beta: Beta, k: usize, seed: u64) -> Result<McGradient> {
    check_mc(lam_a, lam_b, gamma, k)?;
    Ok(run_serial(lam_a, lam_b, gamma, beta, k, seed, true).gradient(gamma, beta))
}
