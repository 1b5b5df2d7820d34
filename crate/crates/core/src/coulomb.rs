//! Population dynamics for the Coulomb-gas stationarity equations: gradient
//! descent with momentum on the eigenvalue "particles".

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::ensembles::Potential;
use crate::error::{Error, Result};
use crate::hciz::{hciz_bh_grad, hciz_grad_exact_beta2, PairConvention, Stabilizer};
use crate::math;
use crate::rng::Rng;
use rand::Rng as _;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Learning rate.
    pub eta: f64,
    /// Momentum coefficient in `[0, 1)`.
    pub momentum: f64,
    /// Relative change of the second moment over `window` iterations.
    pub tol: f64,
    pub window: usize,
    pub max_iter: usize,
    /// `ρ` of the kernel stabilizer for the exact operator.
    pub rho: f64,
    /// Optional geometric decay `η_n = η · decay^(n / window)`.
    pub decay: Option<f64>,
    /// Size cap for the exact β = 2 operator.
    pub max_exact_n: usize,
    /// Fail as soon as a particle leaves `(0, ∞)`; used with log potentials.
    pub require_positive: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            eta: 1e-4,
            momentum: 1e-2,
            tol: 1e-8,
            window: 100,
            max_iter: 400_000,
            rho: 0.5,
            decay: None,
            max_exact_n: 12,
            require_positive: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iter: usize,
    pub m2: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationState {
    pub lam: Vec<f64>,
    pub momentum: Vec<f64>,
    pub iter: usize,
    pub converged: bool,
    /// One point every `window` iterations, plus the final one.
    pub trace: Vec<TracePoint>,
    /// Sup-norm of the operator at the final iterate.
    pub residual: f64,
    /// Number of collision jitters applied.
    pub jitters: usize,
}

fn resolvent_unchecked(lam: &[f64]) -> Vec<f64> {
    let n = lam.len();
    let mut r = vec![0.0; n];
    for i in 0..n {
        let li = lam[i];
        let mut acc = 0.0;
        for j in i + 1..n {
            let d = 1.0 / (li - lam[j]);
            acc += d;
            r[j] -= d;
        }
        r[i] += acc;
    }
    let nf = n as f64;
    r.iter_mut().for_each(|v| *v /= nf);
    r
}

/// `R_i = N⁻¹ Σ_{j≠i} 1/(λ_i − λ_j)`.
pub fn resolvent(lam: &[f64]) -> Result<Vec<f64>> {
    if let Some((i, j)) = closest_pair(lam).filter(|&(i, j)| (lam[i] - lam[j]).abs() <= 1e-12) {
        return Err(Error::Collision { i, j });
    }
    Ok(resolvent_unchecked(lam))
}

/// Indices of the closest pair, or `None` for fewer than two entries.
fn closest_pair(lam: &[f64]) -> Option<(usize, usize)> {
    if lam.len() < 2 {
        return None;
    }
    let mut idx: Vec<usize> = (0..lam.len()).collect();
    idx.sort_by(|&a, &b| lam[a].total_cmp(&lam[b]));
    idx.windows(2)
        .min_by(|a, b| (lam[a[1]] - lam[a[0]]).total_cmp(&(lam[b[1]] - lam[b[0]])))
        .map(|w| (w[0], w[1]))
}

/// Warm-up operator `¼V′(λ_i) − R_i`. The Dyson index multiplies both terms of
/// the prior's stationarity condition and drops out.
pub fn warmup_operator(lam: &[f64], pot: &Potential) -> Result<Vec<f64>> {
    let mut r = resolvent(lam)?;
    for (ri, &x) in r.iter_mut().zip(lam) {
        *ri = 0.25 * pot.derivative(x)? - *ri;
    }
    Ok(r)
}

/// β = 2 denoising operator with the exact spherical-integral gradient:
/// `λλ_i + V′(λ_i)/2 − R_i − Σ_j (K⁻¹)_{ji} √λ y_j K_ij`.
pub fn denoise_operator_exact(lam: &[f64], lam_y: &[f64], lambda: f64, pot: &Potential, stab: Stabilizer) -> Result<Vec<f64>> {
    let r = resolvent(lam)?;
    let g = hciz_grad_exact_beta2(lam, lam_y, lambda, stab)?;
    lam.iter()
        .zip(r.iter().zip(&g))
        .map(|(&x, (ri, gi))| Ok(lambda * x + 0.5 * pot.derivative(x)? - ri - gi))
        .collect()
}

/// β = 1 denoising operator with the Brézin–Hikami gradient:
/// `λλ_i/2 + V′(λ_i)/4 − R_i − N ∂I_BH/∂λ_i`. `lam` and `lam_y` are paired
/// index by index in descending BH order.
pub fn denoise_operator_bh(lam: &[f64], lam_y: &[f64], lambda: f64, pot: &Potential, conv: PairConvention) -> Result<Vec<f64>> {
    let r = resolvent(lam)?;
    let g = hciz_bh_grad(lam, lam_y, lambda, conv)?;
    lam.iter()
        .zip(r.iter().zip(&g))
        .map(|(&x, (ri, gi))| Ok(0.5 * lambda * x + 0.25 * pot.derivative(x)? - ri + gi))
        .collect()
}

/// Number of BH pairs with `√λ Δs Δy ≥ 1` in the current population.
pub fn bh_violations(lam: &[f64], lam_y: &[f64], lambda: f64) -> usize {
    let sl = math::sqrt(lambda);
    let n = lam.len();
    let mut c = 0;
    for i in 0..n {
        for j in i + 1..n {
            if sl * (lam[i] - lam[j]) * (lam_y[i] - lam_y[j]) >= 1.0 {
                c += 1;
            }
        }
    }
    c
}

/// `N⁻¹ Σ λ_i^k`.
pub fn empirical_moments(lam: &[f64], k: u32) -> f64 {
    math::moment(lam, k)
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Separate every adjacent pair closer than 1e-10 by ±1e-8 of the spread.
fn jitter_collisions(lam: &mut [f64]) -> usize {
    let n = lam.len();
    if n < 2 {
        return 0;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| lam[a].total_cmp(&lam[b]));
    let spread = (lam[idx[n - 1]] - lam[idx[0]]).max(1.0);
    let mut count = 0;
    for w in idx.windows(2) {
        if lam[w[1]] - lam[w[0]] < 1e-10 {
            lam[w[0]] -= 1e-8 * spread;
            lam[w[1]] += 1e-8 * spread;
            count += 1;
        }
    }
    count
}

/// Iterate `g ← γg + ηL(Λ)`, `Λ ← Λ − g` from `init` until the second moment
/// settles or `max_iter` is reached.
pub fn run_population_dynamics<F>(mut op: F, init: &[f64], opts: &SolverOptions) -> Result<PopulationState>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    if init.is_empty() || init.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("initial population must be non-empty and finite".into()));
    }
    if !(opts.eta > 0.0) || !(0.0..1.0).contains(&opts.momentum) || opts.window == 0 {
        return Err(Error::InvalidArgument("need eta > 0, momentum in [0, 1) and window >= 1".into()));
    }
    let n = init.len();
    let mut lam = init.to_vec();
    let mut g = vec![0.0; n];
    let mut trace = Vec::new();
    let mut jitters = 0;
    let mut last_m2 = empirical_moments(&lam, 2);
    let mut eta = opts.eta;
    let mut iter = 0;
    let mut converged = false;
    let mut residual = f64::NAN;
    while iter < opts.max_iter {
        jitters += jitter_collisions(&mut lam);
        let l = op(&lam)?;
        residual = sup_norm(&l);
        for i in 0..n {
            g[i] = opts.momentum * g[i] + eta * l[i];
            lam[i] -= g[i];
        }
        iter += 1;
        if opts.require_positive {
            if let Some(x) = lam.iter().find(|&&x| !(x > 0.0)) {
                return Err(Error::Breakdown(alloc::format!("particle left (0, inf) at iteration {iter}: {x:e}")));
            }
        }
        if iter % opts.window == 0 {
            let m2 = empirical_moments(&lam, 2);
            if !m2.is_finite() || m2 > 1e6 {
                return Err(Error::Divergence { iter, m2 });
            }
            trace.push(TracePoint { iter, m2, grad_norm: residual });
            if ((m2 - last_m2) / m2).abs() < opts.tol {
                converged = true;
                break;
            }
            last_m2 = m2;
            if let Some(d) = opts.decay {
                eta *= d;
            }
        }
    }
    if trace.last().map(|t| t.iter) != Some(iter) {
        trace.push(TracePoint { iter, m2: empirical_moments(&lam, 2), grad_norm: residual });
    }
    Ok(PopulationState { lam, momentum: g, iter, converged, trace, residual, jitters })
}

/// Initial population: uniform in `[-1, 1]`, or in `[0.2, 2]` when the
/// potential has a log barrier at the origin.
pub fn default_init(pot: &Potential, n: usize, rng: &mut Rng) -> Vec<f64> {
    if pot.log_coeff != 0.0 {
        (0..n).map(|_| rng.random_range(0.2..2.0)).collect()
    } else {
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }
}

/// Prior-only equilibrium for `pot`, from a random start.
pub fn solve_warmup(pot: &Potential, init: &[f64], opts: &SolverOptions) -> Result<PopulationState> {
    let mut o = opts.clone();
    o.require_positive |= pot.log_coeff != 0.0 && init.iter().all(|&x| x > 0.0);
    run_population_dynamics(|l| warmup_operator(l, pot), init, &o)
}

/// Ascending warm-up equilibrium spectrum of size `n`.
pub fn equilibrium_spectrum(pot: &Potential, n: usize, rng: &mut Rng) -> Result<Vec<f64>> {
    let init = default_init(pot, n, rng);
    let st = solve_warmup(pot, &init, &SolverOptions::default())?;
    let mut v = st.lam;
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// β = 2 denoising fixed point with the exact operator, started from `Λ^Y`.
pub fn solve_denoise_exact(lam_y: &[f64], lambda: f64, pot: &Potential, opts: &SolverOptions) -> Result<PopulationState> {
    if lam_y.len() > opts.max_exact_n {
        return Err(Error::Range(alloc::format!(
            "N = {} for the exact operator (cap {})",
            lam_y.len(),
            opts.max_exact_n
        )));
    }
    let stab = Stabilizer::Mix(opts.rho);
    run_population_dynamics(|l| denoise_operator_exact(l, lam_y, lambda, pot, stab), lam_y, opts)
}

/// β = 1 denoising fixed point with the BH operator. `lam_y` is used in
/// descending order and the population starts at `Λ^Y`.
pub fn solve_denoise_bh(lam_y: &[f64], lambda: f64, pot: &Potential, conv: PairConvention, opts: &SolverOptions) -> Result<PopulationState> {
    let mut y = lam_y.to_vec();
    y.sort_by(|a, b| b.total_cmp(a));
    run_population_dynamics(|l| denoise_operator_bh(l, &y, lambda, pot, conv), &y.clone(), opts)
}
