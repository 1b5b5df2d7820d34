//! Rotation-invariant ensembles: Haar matrices, Wigner, Wishart and the
//! equally spaced "uniform spectrum" prior, plus denoising instances
//! `Y = √λ S + ξ`.

use alloc::string::ToString;
use alloc::vec::Vec;
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMatrix, RMatrix};
use crate::math;
use crate::rng::Rng;

/// Dyson index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Beta {
    Real,
    Complex,
}

impl Beta {
    pub fn value(self) -> f64 {
        match self {
            Beta::Real => 1.0,
            Beta::Complex => 2.0,
        }
    }

    pub fn from_int(b: u32) -> Result<Self> {
        match b {
            1 => Ok(Beta::Real),
            2 => Ok(Beta::Complex),
            _ => Err(Error::InvalidArgument(alloc::format!("beta must be 1 or 2, got {b}"))),
        }
    }
}

/// Real spectrum with its Dyson-index context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub values: Vec<f64>,
    /// True when `values` is non-decreasing.
    pub sorted: bool,
    pub beta: Beta,
}

impl Spectrum {
    pub fn new(values: Vec<f64>, beta: Beta) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("spectrum must be non-empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("spectrum entries must be finite"));
        }
        let sorted = values.windows(2).all(|w| w[0] <= w[1]);
        Ok(Spectrum { values, sorted, beta })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn ascending(&self) -> Spectrum {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        Spectrum { values: v, sorted: true, beta: self.beta }
    }

    /// Values in non-increasing order (the Brézin–Hikami ordering).
    pub fn descending_values(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    pub fn moment(&self, k: u32) -> f64 {
        math::moment(&self.values, k)
    }

    pub fn mean(&self) -> f64 {
        math::mean(&self.values)
    }

    /// Smallest gap between two entries.
    pub fn min_gap(&self) -> f64 {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }
}

/// Confining potential `V(x) = a ln|x| + Σ_k c_k x^k`, `k ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    pub log_coeff: f64,
    /// `poly_coeffs[k]` multiplies `x^(k+1)`.
    pub poly_coeffs: Vec<f64>,
}

impl Potential {
    pub fn new(log_coeff: f64, poly_coeffs: Vec<f64>) -> Result<Self> {
        if !log_coeff.is_finite() || poly_coeffs.iter().any(|c| !c.is_finite()) {
            return Err(invalid("potential coefficients must be finite"));
        }
        if log_coeff == 0.0 && poly_coeffs.iter().all(|&c| c == 0.0) {
            return Err(invalid("potential needs a polynomial or a log term"));
        }
        Ok(Potential { log_coeff, poly_coeffs })
    }

    /// `V(x) = x²`.
    pub fn wigner() -> Self {
        Potential { log_coeff: 0.0, poly_coeffs: alloc::vec![0.0, 1.0] }
    }

    /// `V(x) = 2(1 − 1/α) ln|x| + 2x/α`.
    pub fn wishart(alpha: f64) -> Self {
        Potential { log_coeff: 2.0 * (1.0 - 1.0 / alpha), poly_coeffs: alloc::vec![2.0 / alpha] }
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        let mut v = 0.0;
        if self.log_coeff != 0.0 {
            if x == 0.0 {
                return Err(Error::Domain(x));
            }
            v += self.log_coeff * math::ln(x.abs());
        }
        let mut p = 0.0;
        for c in self.poly_coeffs.iter().rev() {
            p = (p + c) * x;
        }
        Ok(v + p)
    }

    pub fn derivative(&self, x: f64) -> Result<f64> {
        let mut d = 0.0;
        if self.log_coeff != 0.0 {
            if x == 0.0 {
                return Err(Error::Domain(x));
            }
            d += self.log_coeff / x;
        }
        let mut p = 0.0;
        for (k, c) in self.poly_coeffs.iter().enumerate().rev() {
            p = p * x + (k + 1) as f64 * c;
        }
        Ok(d + p)
    }
}

pub fn potential_value(pot: &Potential, x: f64) -> Result<f64> {
    pot.value(x)
}

pub fn potential_derivative(pot: &Potential, x: f64) -> Result<f64> {
    pot.derivative(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EnsembleKind {
    Wigner,
    Wishart { alpha: f64 },
    UniformSpectrum,
    CustomPotential(Potential),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub n: usize,
    pub beta: Beta,
    /// Scale ε of an additive Wigner regularizer `S + εW`; off by default.
    pub regularization: Option<f64>,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, n: usize, beta: Beta) -> Self {
        EnsembleSpec { kind, n, beta, regularization: None }
    }

    /// The confining potential of the prior, when it has one.
    pub fn potential(&self) -> Option<Potential> {
        match &self.kind {
            EnsembleKind::Wigner => Some(Potential::wigner()),
            EnsembleKind::Wishart { alpha } => Some(Potential::wishart(*alpha)),
            EnsembleKind::CustomPotential(p) => Some(p.clone()),
            EnsembleKind::UniformSpectrum => None,
        }
    }
}

/// A sampled Hermitian matrix and its spectrum.
#[derive(Debug, Clone)]
pub struct SampledMatrix {
    pub matrix: CMatrix,
    pub spectrum: Spectrum,
    /// `N/M` actually used for Wishart after rounding `M`.
    pub effective_alpha: Option<f64>,
}

fn gauss(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Haar-distributed real orthogonal matrix (QR of a Gaussian matrix with the
/// sign of R's diagonal folded back into Q).
pub fn sample_orthogonal(n: usize, rng: &mut Rng) -> RMatrix {
    let g = RMatrix::from_fn(n, n, |_, _| gauss(rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Haar-distributed unitary matrix; see [`sample_orthogonal`].
pub fn sample_unitary(n: usize, rng: &mut Rng) -> CMatrix {
    let s = math::sqrt(0.5);
    let g = CMatrix::from_fn(n, n, |_, _| Complex64::new(s * gauss(rng), s * gauss(rng)));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let nd = d.norm();
        if nd > 0.0 {
            let ph = d / nd;
            for i in 0..n {
                q[(i, j)] *= ph;
            }
        }
    }
    q
}

/// Haar matrix on O(n) (β = 1, stored with zero imaginary parts) or U(n).
pub fn sample_haar(n: usize, beta: Beta, rng: &mut Rng) -> Result<CMatrix> {
    if n == 0 {
        return Err(invalid("sample_haar needs n >= 1"));
    }
    Ok(match beta {
        Beta::Real => sample_orthogonal(n, rng).map(|x| Complex64::new(x, 0.0)),
        Beta::Complex => sample_unitary(n, rng),
    })
}

/// Wigner matrix with density ∝ exp Tr[−βN/4 ξ²].
pub fn sample_wigner(n: usize, beta: Beta, rng: &mut Rng) -> CMatrix {
    let nf = n as f64;
    let sd_diag = math::sqrt(2.0 / (beta.value() * nf));
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = Complex64::new(sd_diag * gauss(rng), 0.0);
        for j in 0..i {
            let z = match beta {
                Beta::Real => Complex64::new(gauss(rng) / math::sqrt(nf), 0.0),
                Beta::Complex => {
                    let s = math::sqrt(0.5 / nf);
                    Complex64::new(s * gauss(rng), s * gauss(rng))
                }
            };
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// Equally spaced spectrum `√γ_N (k/N − 1/2)`, `γ_N = 12N²/(N²+2)`, which has
/// `Σ Λ_k² = N` exactly.
pub fn uniform_spectrum_values(n: usize) -> Vec<f64> {
    let nf = n as f64;
    let g = math::sqrt(gamma_n(n));
    (0..n).map(|k| g * (k as f64 / nf - 0.5)).collect()
}

pub fn gamma_n(n: usize) -> f64 {
    let nf = n as f64;
    12.0 * nf * nf / (nf * nf + 2.0)
}

/// `U diag(values) U†` made exactly Hermitian.
pub fn rotate(values: &[f64], u: &CMatrix) -> CMatrix {
    let mut ud = u.clone();
    for (j, v) in values.iter().enumerate() {
        for i in 0..u.nrows() {
            ud[(i, j)] *= *v;
        }
    }
    linalg::hermitize(&(ud * u.adjoint()))
}

fn spectrum_of(m: &CMatrix, beta: Beta) -> Result<Spectrum> {
    let e = linalg::hermitian_eigen(m)?;
    Spectrum::new(e.values, beta)
}

/// Draw one matrix from the ensemble.
pub fn sample_ensemble(spec: &EnsembleSpec, rng: &mut Rng) -> Result<SampledMatrix> {
    let n = spec.n;
    if n == 0 {
        return Err(invalid("ensemble size n must be >= 1"));
    }
    let beta = spec.beta;
    let mut effective_alpha = None;
    let (mut matrix, mut spectrum) = match &spec.kind {
        EnsembleKind::Wigner => {
            let m = sample_wigner(n, beta, rng);
            let s = spectrum_of(&m, beta)?;
            (m, Some(s))
        }
        EnsembleKind::Wishart { alpha } => {
            if !(*alpha > 0.0) || !alpha.is_finite() {
                return Err(invalid("Wishart alpha must be positive"));
            }
            let mcols = (math::round(n as f64 / alpha) as usize).max(1);
            effective_alpha = Some(n as f64 / mcols as f64);
            let mf = mcols as f64;
            let x = match beta {
                Beta::Real => CMatrix::from_fn(n, mcols, |_, _| Complex64::new(gauss(rng) / math::sqrt(mf), 0.0)),
                Beta::Complex => {
                    let s = math::sqrt(0.5 / mf);
                    CMatrix::from_fn(n, mcols, |_, _| Complex64::new(s * gauss(rng), s * gauss(rng)))
                }
            };
            let m = linalg::hermitize(&(&x * x.adjoint()));
            let s = spectrum_of(&m, beta)?;
            (m, Some(s))
        }
        EnsembleKind::UniformSpectrum => {
            let vals = uniform_spectrum_values(n);
            let u = sample_haar(n, beta, rng)?;
            let m = rotate(&vals, &u);
            (m, Some(Spectrum::new(vals, beta)?))
        }
        EnsembleKind::CustomPotential(pot) => {
            let vals = crate::coulomb::equilibrium_spectrum(pot, n, rng)?;
            let u = sample_haar(n, beta, rng)?;
            let m = rotate(&vals, &u);
            (m, Some(Spectrum::new(vals, beta)?.ascending()))
        }
    };
    if let Some(eps) = spec.regularization {
        if eps != 0.0 {
            let w = sample_wigner(n, beta, rng);
            matrix += w.scale(eps);
            spectrum = None;
        }
    }
    let spectrum = match spectrum {
        Some(s) => s,
        None => spectrum_of(&matrix, beta)?,
    };
    Ok(SampledMatrix { matrix, spectrum, effective_alpha })
}

/// A realized denoising problem `Y = √λ S + ξ`.
#[derive(Debug, Clone)]
pub struct DenoisingInstance {
    pub signal: CMatrix,
    pub noise: CMatrix,
    pub data: CMatrix,
    pub lambda: f64,
    pub beta: Beta,
    /// Ascending eigenvalues of Y.
    pub lam_y: Spectrum,
    /// Eigenvectors of Y, columns aligned with `lam_y`.
    pub psi_y: CMatrix,
    /// `p_i = ψ_i† S ψ_i`.
    pub proj: Vec<f64>,
}

impl DenoisingInstance {
    fn build(signal: CMatrix, noise: CMatrix, lambda: f64, beta: Beta) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(invalid("lambda must be finite and >= 0"));
        }
        let data = signal.scale(math::sqrt(lambda)) + &noise;
        let eig = linalg::hermitian_eigen(&data)?;
        let proj = (0..data.nrows()).map(|k| linalg::quad_form(&signal, &eig.vectors, k)).collect();
        Ok(DenoisingInstance {
            lam_y: Spectrum::new(eig.values, beta)?,
            psi_y: eig.vectors,
            proj,
            signal,
            noise,
            data,
            lambda,
            beta,
        })
    }

    /// Same signal and noise at another signal-to-noise ratio.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::build(self.signal.clone(), self.noise.clone(), lambda, self.beta)
    }

    pub fn n(&self) -> usize {
        self.signal.nrows()
    }

    /// `⟨ψ_a| 2√λ S + ξ |ψ_a⟩` evaluated directly.
    pub fn tilted_quadratic(&self, a: usize) -> f64 {
        let m = self.signal.scale(2.0 * math::sqrt(self.lambda)) + &self.noise;
        linalg::quad_form(&m, &self.psi_y, a)
    }
}

/// Draw fresh Wigner noise and build the instance for signal `s`.
pub fn make_denoising_instance(s: &CMatrix, lambda: f64, beta: Beta, rng: &mut Rng) -> Result<DenoisingInstance> {
    let n = s.nrows();
    if n == 0 || s.ncols() != n {
        return Err(invalid("signal must be a non-empty square matrix"));
    }
    let herm_err = (s - s.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if herm_err > 1e-12 * (1.0 + linalg::fro(s)) {
        return Err(Error::InvalidArgument("signal is not Hermitian".to_string()));
    }
    let noise = sample_wigner(n, beta, rng);
    DenoisingInstance::build(s.clone(), noise, lambda, beta)
}

/// Ascending eigenvalues of `√λ diag(values) + noise`.
///
/// The noise law is rotation invariant, so this has the law of the data
/// spectrum for any signal with eigenvalues `values`.
pub fn diagonal_data_eigenvalues(values: &[f64], noise: &CMatrix, lambda: f64) -> Result<Vec<f64>> {
    let n = values.len();
    if n == 0 || noise.nrows() != n || noise.ncols() != n {
        return Err(invalid("noise must be square with the size of the signal spectrum"));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(invalid("lambda must be finite and >= 0"));
    }
    let sl = math::sqrt(lambda);
    let mut y = noise.clone();
    for (i, v) in values.iter().enumerate() {
        y[(i, i)] += Complex64::new(sl * v, 0.0);
    }
    linalg::hermitian_eigenvalues(&y)
}

/// `diag(values)` as a complex matrix.
pub fn diagonal_signal(values: &[f64]) -> CMatrix {
    let n = values.len();
    CMatrix::from_fn(n, n, |i, j| if i == j { Complex64::new(values[i], 0.0) } else { Complex64::new(0.0, 0.0) })
}
