//! Mutual information and MMSE of `Y = √λ S + ξ` for rotation-invariant
//! signals: Wigner closed forms, the equally spaced prior at finite and
//! infinite `N`, the generic spectral formula with a choice of spherical
//! integral backend, and the Hellmann–Feynman MMSE.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::coulomb::{default_init, solve_warmup, SolverOptions};
use crate::ensembles::{gamma_n, Beta, DenoisingInstance, Potential};
use crate::error::{invalid, Error, Result};
use crate::freeprob::{Density, DensityKind};
use crate::hciz::{
    hciz_bh_beta1, hciz_exact_beta2, hciz_mc, hciz_semicircle_closed, kernel_weights, HcizEstimate, PairConvention,
    Stabilizer,
};
use crate::math;
use crate::rng::Rng;

/// Below this SNR the formulas containing `ln √λ` are refused; `λ = 0`
/// itself is answered by `MI = 0`.
pub const LAMBDA_MIN: f64 = 1e-6;

/// Spherical integral evaluator plugged into the spectral MI formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum HciBackend {
    /// Determinant formula, β = 2 only.
    ExactDet,
    /// Brézin–Hikami pair expansion, β = 1 only.
    Bh(PairConvention),
    MonteCarlo { k: usize, seed: u64 },
    /// Two semicircles; the spectra are ignored.
    SemicircleClosed,
}

impl HciBackend {
    pub fn name(&self) -> String {
        match self {
            HciBackend::ExactDet => "exact".to_string(),
            HciBackend::Bh(PairConvention::HalfUpper) => "bh".to_string(),
            HciBackend::Bh(PairConvention::Upper) => "bh-upper".to_string(),
            HciBackend::Bh(PairConvention::All) => "bh-all".to_string(),
            HciBackend::MonteCarlo { k, .. } => format!("mc:{k}"),
            HciBackend::SemicircleClosed => "closed".to_string(),
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            HciBackend::MonteCarlo { seed, .. } => Some(*seed),
            _ => None,
        }
    }
}

/// One MI (and optionally MMSE) evaluation, per `N²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiReport {
    pub lambda: f64,
    pub beta: Beta,
    pub n: usize,
    pub mi: f64,
    pub mmse: Option<f64>,
    pub method: String,
    pub seed: Option<u64>,
    /// Monte-Carlo standard error of `mi`; zero otherwise.
    pub stderr: f64,
    pub pieces: Vec<(String, f64)>,
}

impl MiReport {
    fn new(lambda: f64, beta: Beta, n: usize, method: &str) -> Self {
        MiReport { lambda, beta, n, mi: 0.0, mmse: None, method: method.to_string(), seed: None, stderr: 0.0, pieces: Vec::new() }
    }

    fn piece(&mut self, name: &str, v: f64) {
        self.pieces.push((name.to_string(), v));
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.pieces.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(invalid("lambda must be finite and >= 0"));
    }
    Ok(())
}

fn check_lambda_min(lambda: f64) -> Result<()> {
    check_lambda(lambda)?;
    if lambda < LAMBDA_MIN {
        return Err(Error::Range(format!("lambda = {lambda:e} is below {LAMBDA_MIN:e}")));
    }
    Ok(())
}

/// `(β/4) ln(1+λ)` for a unit-variance Wigner signal. Requires `λ ≥ 0`.
pub fn mi_wigner_closed(lambda: f64, beta: Beta) -> f64 {
    beta.value() / 4.0 * math::ln_1p(lambda)
}

/// The same quantity assembled as `βλ/2 − I` with the two-semicircle
/// spherical integral written out.
pub fn mi_wigner_route(lambda: f64, beta: Beta) -> f64 {
    let r = math::sqrt(4.0 * lambda * (1.0 + lambda) + 1.0);
    beta.value() / 4.0 * (2.0 * lambda + 1.0 - r + math::ln(1.0 + r) - math::LN_2)
}

/// `1/(1+λ)`.
pub fn mmse_wigner_closed(lambda: f64) -> f64 {
    1.0 / (1.0 + lambda)
}

/// `I_N^{(β)}(Λ^s, Λ^Y, √λ)` with the chosen backend.
pub fn hciz_value(lam_s: &[f64], lam_y: &[f64], lambda: f64, beta: Beta, backend: HciBackend) -> Result<HcizEstimate> {
    check_lambda(lambda)?;
    let gamma = math::sqrt(lambda);
    match backend {
        HciBackend::ExactDet => {
            if beta != Beta::Complex {
                return Err(invalid("the determinant backend needs beta = 2"));
            }
            hciz_exact_beta2(lam_s, lam_y, gamma)
        }
        HciBackend::Bh(conv) => {
            if beta != Beta::Real {
                return Err(invalid("the Brezin-Hikami backend needs beta = 1"));
            }
            let mut s = lam_s.to_vec();
            let mut y = lam_y.to_vec();
            s.sort_by(|a, b| b.total_cmp(a));
            y.sort_by(|a, b| b.total_cmp(a));
            hciz_bh_beta1(&s, &y, lambda, conv)
        }
        HciBackend::MonteCarlo { k, seed } => hciz_mc(lam_s, lam_y, gamma, beta, k, seed),
        HciBackend::SemicircleClosed => hciz_semicircle_closed(lambda, beta),
    }
}

/// `(βλ/2N) Tr Λ_s² − I_N(Λ^s, Λ^Y, √λ)`.
pub fn mi_from_spectra(lam_s: &[f64], lam_y: &[f64], lambda: f64, beta: Beta, backend: HciBackend) -> Result<MiReport> {
    check_lambda(lambda)?;
    let n = lam_s.len();
    if n == 0 || lam_y.len() != n {
        return Err(invalid("spectra must be non-empty with equal lengths"));
    }
    let b = beta.value();
    let second = match backend {
        HciBackend::SemicircleClosed => 1.0,
        _ => lam_s.iter().map(|s| s * s).sum::<f64>() / n as f64,
    };
    let quad = b * lambda * second / 2.0;
    let est = hciz_value(lam_s, lam_y, lambda, beta, backend)?;
    let mut rep = MiReport::new(lambda, beta, n, &backend.name());
    rep.seed = backend.seed();
    rep.mi = quad - est.value;
    rep.stderr = est.stderr;
    rep.piece("quadratic", quad);
    rep.piece("hciz", est.value);
    if let Some(v) = &est.validity {
        rep.piece("bh_violations", v.len() as f64);
    }
    Ok(rep)
}

fn pair_count(n: usize) -> f64 {
    let nf = n as f64;
    nf * (nf - 1.0) / 2.0
}

/// `ln(d / (1 − e^{−d}))` for `d ≥ 0`.
fn ln_phi_tilde(d: f64) -> f64 {
    if d < 1e-8 {
        d / 2.0
    } else {
        math::ln(d) - math::ln(-math::exp_m1(-d))
    }
}

/// MI for the equally spaced prior (`β = 2`) from the data spectrum alone.
///
/// Each term of the closed formula is kept as a piece; the exponential pair
/// differences go through `log_diff_exp`.
pub fn mi_uniform_finite_n(lam_y: &[f64], lambda: f64) -> Result<MiReport> {
    check_lambda(lambda)?;
    let n = lam_y.len();
    if n == 0 {
        return Err(invalid("empty data spectrum"));
    }
    let mut rep = MiReport::new(lambda, Beta::Complex, n, "uniform-finite-n");
    if lambda == 0.0 {
        return Ok(rep);
    }
    check_lambda_min(lambda)?;
    let nf = n as f64;
    let n2 = nf * nf;
    let g = gamma_n(n);
    let a = math::sqrt(g * lambda);
    let sl = math::sqrt(lambda);
    let mut exp_pairs = 0.0;
    let mut vdm_pairs = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let gap = (lam_y[i] - lam_y[j]).abs();
            if gap == 0.0 {
                return Err(Error::Degenerate { i, j, gap });
            }
            exp_pairs += math::log_diff_exp(a * lam_y[i], a * lam_y[j]);
            vdm_pairs += math::ln(sl * gap);
        }
    }
    let lsf = math::ln_superfactorial(n);
    let pairs = pair_count(n);
    let index_pairs = pairs * (0.5 * math::ln(g) - math::ln(nf)) + lsf;
    let trace = a / (2.0 * nf) * lam_y.iter().sum::<f64>();
    let norm = (lsf - pairs * math::ln(nf)) / n2;
    rep.mi = lambda - exp_pairs / n2 + vdm_pairs / n2 + index_pairs / n2 + trace - norm;
    rep.piece("lambda", lambda);
    rep.piece("exp_pairs", -exp_pairs / n2);
    rep.piece("vandermonde_pairs", vdm_pairs / n2);
    rep.piece("index_pairs", index_pairs / n2);
    rep.piece("trace", trace);
    rep.piece("normalization", -norm);
    if !rep.mi.is_finite() {
        return Err(Error::Breakdown("non-finite mutual information".into()));
    }
    Ok(rep)
}

/// [`mi_uniform_finite_n`] on the instance's data spectrum.
pub fn mi_uniform_instance(inst: &DenoisingInstance) -> Result<MiReport> {
    if inst.beta != Beta::Complex {
        return Err(invalid("the uniform-prior formula needs beta = 2"));
    }
    mi_uniform_finite_n(&inst.lam_y.values, inst.lambda)
}

/// `d/expm1(d)` and `(1 − d/expm1(d))/d` for `d ≥ 0`.
fn phi_and_g(d: f64) -> (f64, f64) {
    if d < 1e-4 {
        (1.0 - d / 2.0 + d * d / 12.0, 0.5 - d / 12.0)
    } else {
        let em = math::exp_m1(d);
        let phi = if em.is_finite() { d / em } else { 0.0 };
        (phi, (1.0 - phi) / d)
    }
}

/// Pairs closer than this use the joint analytic limit of the ratio and
/// Vandermonde terms.
const PAIR_GAP_MIN: f64 = 1e-10;

/// MMSE for the equally spaced prior (`β = 2`): the `λ`-derivative of
/// [`mi_uniform_finite_n`] along the instance, with `dλ_i^Y/d√λ = p_i`.
///
/// The evaluated quantity is `β·MMSE`; `mmse` holds it divided by `β`. The
/// `1/λ` term carries its exact `(N−1)/N` factor so that the pair matches the
/// finite-`N` MI formula.
pub fn mmse_uniform_finite_n(inst: &DenoisingInstance) -> Result<MiReport> {
    if inst.beta != Beta::Complex {
        return Err(invalid("the uniform-prior formula needs beta = 2"));
    }
    let lambda = inst.lambda;
    check_lambda_min(lambda)?;
    let mut rep = mi_uniform_instance(inst)?;
    let y = &inst.lam_y.values;
    let p = &inst.proj;
    let n = y.len();
    let nf = n as f64;
    let n2 = nf * nf;
    let g = gamma_n(n);
    let sg = math::sqrt(g);
    let u = math::sqrt(lambda);
    let a = sg * u;
    let mut ratio_sum = 0.0;
    let mut vdm_sum = 0.0;
    let mut limit_sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let (hi, lo) = if y[i] >= y[j] { (i, j) } else { (j, i) };
            let dy = y[hi] - y[lo];
            let d = a * dy;
            let v_hi = y[hi] / u + p[hi];
            let dp = p[hi] - p[lo];
            let (phi, gd) = phi_and_g(d);
            if dy < PAIR_GAP_MIN {
                // ratio + Vandermonde term, with the 1/Δy parts cancelled
                limit_sum += v_hi + phi / (a * u) - dp * gd;
            } else {
                ratio_sum += v_hi + phi / (a * u) + dp * phi / d;
                vdm_sum += dp / dy;
            }
        }
    }
    let exp_ratio = -2.0 * sg / n2 * (ratio_sum + limit_sum);
    let vdm = 2.0 / (u * n2) * vdm_sum;
    let inv_lambda = (nf - 1.0) / (nf * lambda);
    let trace_y = sg / u / nf * y.iter().sum::<f64>();
    let trace_p = sg / nf * p.iter().sum::<f64>();
    let beta_mmse = 4.0 + exp_ratio + inv_lambda + vdm + trace_y + trace_p;
    rep.method = "uniform-finite-n".to_string();
    rep.mmse = Some(beta_mmse / 2.0);
    rep.piece("mmse_constant", 4.0);
    rep.piece("mmse_exp_ratio", exp_ratio);
    rep.piece("mmse_inv_lambda", inv_lambda);
    rep.piece("mmse_vandermonde", vdm);
    rep.piece("mmse_trace_y", trace_y);
    rep.piece("mmse_trace_p", trace_p);
    rep.piece("beta_mmse", beta_mmse);
    if !beta_mmse.is_finite() {
        return Err(Error::Breakdown("non-finite MMSE".into()));
    }
    Ok(rep)
}

/// Nodes and normalized weights of `ρ` on its support by Gauss–Legendre in
/// `θ`, `x = m − s cos θ`.
fn density_nodes(rho: &Density, m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (mut lo, mut hi) = rho.support;
    if let DensityKind::Sampled { grid, values, .. } = &rho.kind {
        let peak = values.iter().copied().fold(0.0, f64::max);
        let cut = 1e-6 * peak;
        let first = values.iter().position(|&v| v > cut).ok_or_else(|| invalid("density is identically zero"))?;
        let last = values.iter().rposition(|&v| v > cut).unwrap_or(first);
        lo = grid[first.saturating_sub(1)];
        hi = grid[(last + 1).min(grid.len() - 1)];
    }
    if !(hi > lo) {
        return Err(invalid("density support is empty"));
    }
    let mid = (lo + hi) / 2.0;
    let half = (hi - lo) / 2.0;
    let (th, w) = math::gauss_legendre_on(m, 0.0, math::PI);
    let mut xs = Vec::with_capacity(m);
    let mut ws = Vec::with_capacity(m);
    for (t, wt) in th.iter().zip(&w) {
        let x = mid - half * math::cos(*t);
        xs.push(x);
        ws.push(wt * half * math::sin(*t) * rho.eval(x));
    }
    let total: f64 = ws.iter().sum();
    if !(total > 0.0) {
        return Err(invalid("density has no mass on its support"));
    }
    ws.iter_mut().for_each(|w| *w /= total);
    Ok((xs, ws))
}

fn asymptotic_double_integral(xs: &[f64], ws: &[f64], c: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..xs.len() {
        // diagonal: the log terms combine to ln 1 = 0
        acc += ws[i] * ws[i] * (-c * xs[i]);
        for j in i + 1..xs.len() {
            let d = c * (xs[i] - xs[j]).abs();
            acc += 2.0 * ws[i] * ws[j] * (ln_phi_tilde(d) - c * xs[i].max(xs[j]));
        }
    }
    acc
}

/// Large-`N` MI of the equally spaced prior from the limiting data density:
/// `λ + ln(12λ)/4 + ½∬ ρρ ln|(x−y)/(e^{cx} − e^{cy})|`, `c = √(12λ)`.
///
/// The `ln|x−y|` singularity is merged with the exponential difference so the
/// integrand is bounded, and the `ln c` pieces cancel against `ln(12λ)/4`.
pub fn mi_uniform_asymptotic(rho_y: &Density, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let c = math::sqrt(12.0 * lambda);
    let (x1, w1) = density_nodes(rho_y, 400)?;
    let (x2, w2) = density_nodes(rho_y, 800)?;
    let v1 = asymptotic_double_integral(&x1, &w1, c);
    let v2 = asymptotic_double_integral(&x2, &w2, c);
    if !((v1 - v2).abs() <= 1e-4 * (1.0 + v2.abs())) {
        return Err(Error::NoConvergence { iters: 800, residual: (v1 - v2).abs() });
    }
    Ok(lambda + 0.5 * v2)
}

/// Options for [`mmse_hf`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HfOptions {
    pub max_n: usize,
    pub stab: Stabilizer,
}

impl Default for HfOptions {
    fn default() -> Self {
        HfOptions { max_n: 10, stab: Stabilizer::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HfReport {
    pub lambda: f64,
    pub n: usize,
    /// `∂I_N/∂λ` at fixed `Λ^s`.
    pub di_dlambda: f64,
    /// `df_N/dλ = −(1/2N) Σ (λ_a^s)² + ∂I_N/∂λ`.
    pub df_dlambda: f64,
    /// `(2/N) Tr Λ_s² − 2 ∂I_N/∂λ`, equal to `(1/N) Tr Λ_s² − 2 df_N/dλ`.
    pub mmse: f64,
    /// `N Σ_ab λ_a^s W_ab ⟨ψ_b|2√λS+ξ|ψ_b⟩` with `W_ab = (K⁻¹)_{ba} K_ab`.
    pub kernel_term: f64,
    /// `d/d√λ ln Δ(√λ Λ^Y)`.
    pub vandermonde_term: f64,
    /// `max_a |⟨ψ_a|2√λS+ξ|ψ_a⟩ − (λ_a^Y + √λ p_a)|`.
    pub identity_error: f64,
}

/// MMSE through the Hellmann–Feynman derivative of the exact `β = 2`
/// spherical integral at a fixed signal spectrum.
pub fn mmse_hf(inst: &DenoisingInstance, lam_s: &[f64], opts: &HfOptions) -> Result<HfReport> {
    if inst.beta != Beta::Complex {
        return Err(invalid("the Hellmann-Feynman MMSE needs beta = 2"));
    }
    let lambda = inst.lambda;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid("lambda must be positive"));
    }
    let n = inst.n();
    if lam_s.len() != n {
        return Err(invalid("signal spectrum and instance sizes differ"));
    }
    if n > opts.max_n {
        return Err(Error::Range(format!("N = {n} exceeds the determinant cap {}", opts.max_n)));
    }
    let y = &inst.lam_y.values;
    let p = &inst.proj;
    let nf = n as f64;
    let u = math::sqrt(lambda);
    let dy: Vec<f64> = (0..n).map(|b| y[b] + u * p[b]).collect();
    let identity_error = (0..n).map(|b| (inst.tilted_quadratic(b) - dy[b]).abs()).fold(0.0, f64::max);

    let w = kernel_weights(lam_s, y, lambda, opts.stab)?;
    let mut kernel = 0.0;
    for a in 0..n {
        for b in 0..n {
            kernel += lam_s[a] * w[(a, b)] * dy[b];
        }
    }
    kernel *= nf;
    let mut vdm = pair_count(n) / u;
    for i in 0..n {
        for j in i + 1..n {
            let gap = y[j] - y[i];
            if gap.abs() < 1e-12 {
                return Err(Error::Degenerate { i, j, gap });
            }
            vdm += (p[j] - p[i]) / gap;
        }
    }
    let di = (kernel - vdm) / (2.0 * u * nf * nf);
    let m2 = lam_s.iter().map(|s| s * s).sum::<f64>() / nf;
    Ok(HfReport {
        lambda,
        n,
        di_dlambda: di,
        df_dlambda: -m2 / 2.0 + di,
        mmse: 2.0 * m2 - 2.0 * di,
        kernel_term: kernel,
        vandermonde_term: vdm,
        identity_error,
    })
}

/// `N⁻² ln p(Λ^s) = (β/N²) Σ_{i<j} ln|λ_i − λ_j| − (β/4N) Σ V(λ_i)`.
pub fn log_prior_density(lam_s: &[f64], beta: Beta, pot: &Potential) -> Result<f64> {
    let n = lam_s.len();
    if n == 0 {
        return Err(invalid("empty spectrum"));
    }
    let nf = n as f64;
    let b = beta.value();
    let mut pairs = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d = (lam_s[i] - lam_s[j]).abs();
            if d == 0.0 {
                return Err(Error::Collision { i, j });
            }
            pairs += math::ln(d);
        }
    }
    let mut v = 0.0;
    for &x in lam_s {
        v += pot.value(x)?;
    }
    Ok(b * pairs / (nf * nf) - b * v / (4.0 * nf))
}

/// `τ_N` with the quality of the warm-up state it was read from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauN {
    pub value: f64,
    pub n: usize,
    pub beta: Beta,
    /// Sup-norm of the warm-up operator at the state used.
    pub residual: f64,
    pub converged: bool,
    /// Sorted warm-up spectrum.
    pub spectrum: Vec<f64>,
}

/// Minus the `λ = 0` bracket at the warm-up equilibrium; compute once per
/// `(pot, N, β)` and reuse.
pub fn tau_n(pot: &Potential, n: usize, beta: Beta, opts: &SolverOptions, rng: &mut Rng) -> Result<TauN> {
    if n == 0 {
        return Err(invalid("n must be >= 1"));
    }
    let init = default_init(pot, n, rng);
    let st = solve_warmup(pot, &init, opts)?;
    let mut spectrum = st.lam;
    spectrum.sort_by(f64::total_cmp);
    let value = -log_prior_density(&spectrum, beta, pot)?;
    Ok(TauN { value, n, beta, residual: st.residual, converged: st.converged, spectrum })
}

/// The free-entropy bracket at a given signal spectrum:
/// `N⁻² ln p(Λ^s) − (βλ/4N) Tr Λ_s² + I_N(Λ^s, Λ^Y, √λ) + τ_N`.
pub fn free_entropy_finite_n(
    lam_s: &[f64],
    lam_y: &[f64],
    lambda: f64,
    beta: Beta,
    pot: &Potential,
    backend: HciBackend,
    tau: f64,
) -> Result<f64> {
    check_lambda(lambda)?;
    let n = lam_s.len();
    let lp = log_prior_density(lam_s, beta, pot)?;
    let quad = beta.value() * lambda / (4.0 * n as f64) * lam_s.iter().map(|s| s * s).sum::<f64>();
    let i = if lambda == 0.0 { 0.0 } else { hciz_value(lam_s, lam_y, lambda, beta, backend)?.value };
    Ok(lp - quad + i + tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coulomb::solve_denoise_exact;
    use crate::ensembles::{diagonal_signal, make_denoising_instance, sample_wigner, uniform_spectrum_values};
    use crate::linalg::{self, RMatrix};
    use crate::rng;

    fn wigner_spectrum(n: usize, beta: Beta, seed: u64) -> Vec<f64> {
        let mut r = rng::from_seed(seed);
        linalg::hermitian_eigenvalues(&sample_wigner(n, beta, &mut r)).unwrap()
    }

    fn uniform_instance(n: usize, lambda: f64, seed: u64) -> DenoisingInstance {
        let mut r = rng::from_seed(seed);
        make_denoising_instance(&diagonal_signal(&uniform_spectrum_values(n)), lambda, Beta::Complex, &mut r).unwrap()
    }

    #[test]
    fn wigner_closed_forms() {
        assert_eq!(mi_wigner_closed(0.0, Beta::Complex), 0.0);
        assert!((mi_wigner_closed(1.0, Beta::Complex) - 0.5 * math::LN_2).abs() < 1e-15);
        for l in [0.5, 1.0, 2.0] {
            for b in [Beta::Real, Beta::Complex] {
                assert!((mi_wigner_closed(l, b) - mi_wigner_route(l, b)).abs() < 1e-12);
            }
        }
        assert_eq!(mmse_wigner_closed(0.0), 1.0);
        assert_eq!(mmse_wigner_closed(1.0), 0.5);
        assert_eq!(mmse_wigner_closed(3.0), 0.25);
    }

    #[test]
    fn closed_backend_reproduces_wigner() {
        let s = [0.0; 3];
        for l in [0.5, 1.0, 2.0] {
            for b in [Beta::Real, Beta::Complex] {
                let r = mi_from_spectra(&s, &s, l, b, HciBackend::SemicircleClosed).unwrap();
                assert!((r.mi - mi_wigner_closed(l, b)).abs() < 1e-12, "{l} {b:?}");
            }
        }
    }

    #[test]
    fn zero_snr_for_every_backend() {
        let s2 = wigner_spectrum(6, Beta::Complex, 1);
        let y2 = wigner_spectrum(6, Beta::Complex, 2);
        let s1 = wigner_spectrum(6, Beta::Real, 3);
        let y1 = wigner_spectrum(6, Beta::Real, 4);
        let cases = [
            (&s2, &y2, Beta::Complex, HciBackend::ExactDet),
            (&s1, &y1, Beta::Real, HciBackend::Bh(PairConvention::HalfUpper)),
            (&s2, &y2, Beta::Complex, HciBackend::MonteCarlo { k: 2048, seed: 5 }),
            (&s1, &y1, Beta::Real, HciBackend::MonteCarlo { k: 2048, seed: 5 }),
            (&s2, &y2, Beta::Complex, HciBackend::SemicircleClosed),
        ];
        for (s, y, b, be) in cases {
            let r = mi_from_spectra(s, y, 0.0, b, be).unwrap();
            assert_eq!(r.mi, 0.0, "{be:?}");
            assert_eq!(r.stderr, 0.0);
        }
        assert_eq!(mi_uniform_finite_n(&y2, 0.0).unwrap().mi, 0.0);
        assert!(matches!(mi_uniform_finite_n(&y2, 1e-8), Err(Error::Range(_))));
        assert_eq!(mi_uniform_asymptotic(&Density::semicircle(1.0).unwrap(), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn backend_beta_mismatch() {
        let s = [0.1, 0.5];
        assert!(mi_from_spectra(&s, &s, 1.0, Beta::Real, HciBackend::ExactDet).is_err());
        assert!(mi_from_spectra(&s, &s, 1.0, Beta::Complex, HciBackend::Bh(PairConvention::Upper)).is_err());
    }

    #[test]
    fn shift_invariance_exact() {
        let s = wigner_spectrum(5, Beta::Complex, 7);
        let y = wigner_spectrum(5, Beta::Complex, 8);
        let (l, c, d) = (0.7, 0.4, -0.3);
        let nf = 5.0;
        let base = mi_from_spectra(&s, &y, l, Beta::Complex, HciBackend::ExactDet).unwrap().mi;
        let s2: Vec<f64> = s.iter().map(|x| x + c).collect();
        let y2: Vec<f64> = y.iter().map(|x| x + d).collect();
        let shifted = mi_from_spectra(&s2, &y2, l, Beta::Complex, HciBackend::ExactDet).unwrap().mi;
        // I moves by √λ (c·mean y + d·mean s + c d); Tr Λ_s² picks up 2c Σs + Nc²
        let (ms, my) = (math::mean(&s), math::mean(&y));
        let di = math::sqrt(l) * (c * my + d * ms + c * d);
        let dq = l * (2.0 * c * s.iter().sum::<f64>() + nf * c * c) / nf;
        assert!((shifted - (base + dq - di)).abs() < 1e-9, "{shifted} {base}");
    }

    #[test]
    fn uniform_pieces_are_the_exact_determinant_route() {
        for &(n, l) in &[(4usize, 0.5), (6, 1.3)] {
            let inst = uniform_instance(n, l, 11 + n as u64);
            let a = mi_uniform_instance(&inst).unwrap();
            let b = mi_from_spectra(&uniform_spectrum_values(n), &inst.lam_y.values, l, Beta::Complex, HciBackend::ExactDet)
                .unwrap();
            assert!((a.mi - b.mi).abs() < 1e-9, "{} {}", a.mi, b.mi);
        }
    }

    #[test]
    fn uniform_is_permutation_invariant_and_matches_merged_form() {
        let inst = uniform_instance(60, 2.0, 3);
        let y = inst.lam_y.values.clone();
        let a = mi_uniform_finite_n(&y, 2.0).unwrap().mi;
        let mut z = y.clone();
        z.reverse();
        z.swap(3, 40);
        assert!((a - mi_uniform_finite_n(&z, 2.0).unwrap().mi).abs() < 1e-12);
        // pairs merged as ln(d/(1−e^{−d})) − a·max, all constants cancelled
        let n = y.len() as f64;
        let c = math::sqrt(gamma_n(y.len()) * 2.0);
        let mut acc = 0.0;
        for i in 0..y.len() {
            for j in i + 1..y.len() {
                acc += ln_phi_tilde(c * (y[j] - y[i]).abs()) - c * y[i].max(y[j]);
            }
        }
        let merged = 2.0 + acc / (n * n) + c / (2.0 * n) * y.iter().sum::<f64>();
        assert!((a - merged).abs() < 1e-11, "{a} {merged}");
    }

    #[test]
    fn uniform_mmse_is_mi_derivative() {
        let inst = uniform_instance(40, 1.0, 21);
        let rep = mmse_uniform_finite_n(&inst).unwrap();
        let h = 1e-4;
        let up = mi_uniform_instance(&inst.with_lambda(1.0 + h).unwrap()).unwrap().mi;
        let dn = mi_uniform_instance(&inst.with_lambda(1.0 - h).unwrap()).unwrap().mi;
        let fd = 4.0 / 2.0 * (up - dn) / (2.0 * h);
        let m = rep.mmse.unwrap();
        assert!((m - fd).abs() < 1e-6 * m.abs(), "{m} {fd}");
        assert!(m > 0.0 && m < 2.0);
    }

    #[test]
    fn uniform_mmse_matches_hf_at_uniform_spectrum() {
        let inst = uniform_instance(6, 0.8, 4);
        let a = mmse_uniform_finite_n(&inst).unwrap().mmse.unwrap();
        let b = mmse_hf(&inst, &uniform_spectrum_values(6), &HfOptions::default()).unwrap();
        // β·MMSE = 4 − 4 ∂I/∂λ; the HF report holds 2 − 2 ∂I/∂λ
        assert!((a - b.mmse).abs() < 1e-8, "{a} {}", b.mmse);
    }

    #[test]
    fn degenerate_pair_limit_is_continuous() {
        let inst = uniform_instance(5, 1.0, 9);
        let base = mmse_uniform_finite_n(&inst).unwrap();
        let mut near = inst.clone();
        let mut at = inst.clone();
        let mid = 0.5 * (inst.lam_y.values[1] + inst.lam_y.values[2]);
        near.lam_y.values[1] = mid - 1e-9;
        near.lam_y.values[2] = mid + 1e-9;
        at.lam_y.values[1] = mid - 1e-11;
        at.lam_y.values[2] = mid + 1e-11;
        let b_near = mmse_uniform_finite_n(&near).unwrap().get("beta_mmse").unwrap();
        let b_at = mmse_uniform_finite_n(&at).unwrap().get("beta_mmse").unwrap();
        assert!(base.get("beta_mmse").unwrap().is_finite());
        assert!((b_near - b_at).abs() < 1e-6, "{b_near} {b_at}");
    }

    /// `d/du ln det[(u y_a)^{b−1}]` through the inverse Vandermonde matrix.
    fn vandermonde_inverse_route(y: &[f64], p: &[f64], u: f64) -> f64 {
        let n = y.len();
        let v = RMatrix::from_fn(n, n, |a, b| math::powi(u * y[a], b as i32));
        let inv = linalg::inverse(&v).unwrap();
        let mut acc = 0.0;
        for a in 0..n {
            for b in 1..n {
                acc += inv[(b, a)] * b as f64 * math::powi(u * y[a], b as i32 - 1) * (y[a] + u * p[a]);
            }
        }
        acc
    }

    fn wigner_instance(n: usize, lambda: f64, seed: u64) -> DenoisingInstance {
        let mut r = rng::from_seed(seed);
        let s = sample_wigner(n, Beta::Complex, &mut r);
        make_denoising_instance(&s, lambda, Beta::Complex, &mut r).unwrap()
    }

    #[test]
    fn hf_identity_and_vandermonde_routes() {
        let inst = wigner_instance(5, 0.9, 31);
        let s = linalg::hermitian_eigenvalues(&inst.signal).unwrap();
        let rep = mmse_hf(&inst, &s, &HfOptions::default()).unwrap();
        assert!(rep.identity_error < 1e-10);
        let alt = vandermonde_inverse_route(&inst.lam_y.values, &inst.proj, math::sqrt(0.9));
        assert!((rep.vandermonde_term - alt).abs() < 1e-8 * alt.abs(), "{} {alt}", rep.vandermonde_term);
        assert!(rep.mmse >= 0.0 && rep.mmse <= 2.0 * s.iter().map(|x| x * x).sum::<f64>() / 5.0);
        let big = wigner_instance(11, 0.9, 1);
        let s11 = linalg::hermitian_eigenvalues(&big.signal).unwrap();
        assert!(matches!(mmse_hf(&big, &s11, &HfOptions::default()), Err(Error::Range(_))));
    }

    #[test]
    fn hf_matches_fixed_signal_derivative() {
        let inst = wigner_instance(4, 1.0, 41);
        let s = linalg::hermitian_eigenvalues(&inst.signal).unwrap();
        let rep = mmse_hf(&inst, &s, &HfOptions::default()).unwrap();
        let h = 1e-5;
        let f = |l: f64| {
            let i = inst.with_lambda(l).unwrap();
            hciz_exact_beta2(&s, &i.lam_y.values, math::sqrt(l)).unwrap().value
        };
        let fd = (f(1.0 + h) - f(1.0 - h)) / (2.0 * h);
        assert!((rep.di_dlambda - fd).abs() < 1e-7, "{} {fd}", rep.di_dlambda);
    }

    fn solved(inst: &DenoisingInstance, pot: &Potential) -> Vec<f64> {
        let opts = SolverOptions { eta: 2e-3, momentum: 0.5, tol: 1e-15, max_iter: 400_000, ..Default::default() };
        let st = solve_denoise_exact(&inst.lam_y.values, inst.lambda, pot, &opts).unwrap();
        assert!(st.residual < 1e-8, "residual {}", st.residual);
        let mut v = st.lam;
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn hf_matches_free_entropy_difference_at_solved_spectra() {
        let pot = Potential::wigner();
        let inst = wigner_instance(3, 1.0, 51);
        let s0 = solved(&inst, &pot);
        let rep = mmse_hf(&inst, &s0, &HfOptions::default()).unwrap();
        let h = 1e-4;
        let f = |l: f64| {
            let i = inst.with_lambda(l).unwrap();
            let s = solved(&i, &pot);
            free_entropy_finite_n(&s, &i.lam_y.values, l, Beta::Complex, &pot, HciBackend::ExactDet, 0.0).unwrap()
        };
        let fd = (f(1.0 + h) - f(1.0 - h)) / (2.0 * h);
        assert!((rep.df_dlambda - fd).abs() < 1e-3, "{} {fd}", rep.df_dlambda);
        let m2 = s0.iter().map(|x| x * x).sum::<f64>() / 3.0;
        assert!((rep.mmse - (m2 - 2.0 * rep.df_dlambda)).abs() < 1e-12);
    }

    /// Single small-N realizations can leave `[0, 2 m₂]` and need not be
    /// monotone; seed means behave.
    #[test]
    fn seed_means_grow_and_stay_in_bounds() {
        let pot = Potential::wigner();
        let n = 5;
        let lams = [0.2, 0.6, 1.2, 3.0];
        let mut f_mean = [0.0; 4];
        let mut mmse_mean = [0.0; 4];
        let mut m2_mean = [0.0; 4];
        let seeds = 8;
        for seed in 0..seeds {
            let base = wigner_instance(n, 0.2, 200 + seed);
            for (k, &l) in lams.iter().enumerate() {
                let inst = base.with_lambda(l).unwrap();
                let s = solved(&inst, &pot);
                f_mean[k] += free_entropy_finite_n(&s, &inst.lam_y.values, l, Beta::Complex, &pot, HciBackend::ExactDet, 0.0)
                    .unwrap()
                    / seeds as f64;
                mmse_mean[k] += mmse_hf(&inst, &s, &HfOptions::default()).unwrap().mmse / seeds as f64;
                m2_mean[k] += s.iter().map(|x| x * x).sum::<f64>() / n as f64 / seeds as f64;
            }
        }
        for k in 0..4 {
            assert!(mmse_mean[k] >= 0.0 && mmse_mean[k] <= 2.0 * m2_mean[k], "{k}: {mmse_mean:?}");
        }
        assert!(f_mean.windows(2).all(|w| w[1] > w[0]), "{f_mean:?}");
        assert!(mmse_mean.windows(2).all(|w| w[1] < w[0]), "{mmse_mean:?}");
    }

    #[test]
    fn tau_cancels_at_warmup_and_closed_relation() {
        let pot = Potential::wigner();
        let mut r = rng::from_seed(71);
        let n = 64;
        let tau = tau_n(&pot, n, Beta::Complex, &SolverOptions::default(), &mut r).unwrap();
        assert!(tau.converged);
        let s = &tau.spectrum;
        let f0 = free_entropy_finite_n(s, s, 0.0, Beta::Complex, &pot, HciBackend::ExactDet, tau.value).unwrap();
        assert!(f0.abs() < 1e-12);
        let f1 = free_entropy_finite_n(s, s, 1.0, Beta::Complex, &pot, HciBackend::SemicircleClosed, tau.value).unwrap();
        let expect = 2.0 / 4.0 - mi_wigner_closed(1.0, Beta::Complex);
        assert!((f1 - expect).abs() < 2e-2, "{f1} {expect}");
    }

    #[test]
    fn asymptotic_uniform_small_snr_and_merged_diagonal() {
        let rho = Density::uniform(-math::sqrt(3.0), math::sqrt(3.0)).unwrap();
        let v = mi_uniform_asymptotic(&rho, 1e-3).unwrap();
        assert!(v.abs() < 1e-2, "{v}");
        let (xs, ws) = density_nodes(&rho, 200).unwrap();
        assert!((ws.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(xs.iter().all(|x| x.abs() < math::sqrt(3.0)));
        assert!((ln_phi_tilde(1e-9) - 0.5e-9).abs() < 1e-20);
        assert!((ln_phi_tilde(2.0) - math::ln(2.0 / (1.0 - math::exp(-2.0)))).abs() < 1e-15);
    }

    #[test]
    #[ignore = "known failure: the pair expansion overshoots I by a factor of about 3.5 at small SNR; see README"]
    fn bh_and_mc_agree_at_small_snr() {
        let s = wigner_spectrum(16, Beta::Real, 81);
        let y = wigner_spectrum(16, Beta::Real, 82);
        let l = 0.01;
        let bh = mi_from_spectra(&s, &y, l, Beta::Real, HciBackend::Bh(PairConvention::HalfUpper)).unwrap();
        let mc = mi_from_spectra(&s, &y, l, Beta::Real, HciBackend::MonteCarlo { k: 100_000, seed: 3 }).unwrap();
        let tol = (3.0 * mc.stderr).max(0.05 * mc.mi.abs());
        assert!((bh.mi - mc.mi).abs() <= tol, "bh {} mc {} ± {}", bh.mi, mc.mi, mc.stderr);
    }

    #[test]
    #[ignore = "known failure: inherits the pair-expansion overshoot; see README"]
    fn half_rule_small_snr() {
        let l = 0.01;
        let s2 = wigner_spectrum(10, Beta::Complex, 91);
        let y2 = wigner_spectrum(10, Beta::Complex, 92);
        let two = mi_from_spectra(&s2, &y2, l, Beta::Complex, HciBackend::ExactDet).unwrap().mi;
        let one = mi_from_spectra(&s2, &y2, l, Beta::Real, HciBackend::Bh(PairConvention::HalfUpper)).unwrap().mi;
        assert!((one - 0.5 * two).abs() < 0.05 * 0.5 * two, "beta1 {one} beta2 {two}");
    }
}
