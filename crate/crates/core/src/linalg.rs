//! Thin wrappers over nalgebra: sorted Hermitian eigen-decomposition with a
//! fixed phase convention, and log-determinants through LU.

use alloc::format;
use alloc::vec::Vec;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math;

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Column k is the eigenvector of `values[k]`; its largest-magnitude entry
    /// is real and positive.
    pub vectors: CMatrix,
}

/// Eigen-decomposition of a Hermitian matrix (only the lower triangle is read).
pub fn hermitian_eigen(m: &CMatrix) -> Result<HermitianEigen> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Eigen(format!("matrix is {}x{}", n, m.ncols())));
    }
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 100_000 * n.max(1))
        .ok_or_else(|| Error::Eigen(format!("no convergence at n = {n}")))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen(format!("non-finite eigenvalue at n = {n}")));
    }
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let mut piv = 0;
        let mut best = -1.0;
        for (i, z) in col.iter().enumerate() {
            let a = z.norm_sqr();
            if a > best + 1e-14 {
                best = a;
                piv = i;
            }
        }
        let phase = col[piv].conj() / col[piv].norm();
        for i in 0..n {
            vectors[(i, dst)] = col[i] * phase;
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// Ascending eigenvalues only; skips the eigenvector accumulation.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Eigen(format!("matrix is {}x{}", n, m.ncols())));
    }
    let mut values: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen(format!("non-finite eigenvalue at n = {n}")));
    }
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Hermitian part (M + M†)/2, used to clean round-off before eigen-solves.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Frobenius norm.
pub fn fro(m: &CMatrix) -> f64 {
    math::sqrt(m.iter().map(|z| z.norm_sqr()).sum())
}

/// ψ† M ψ for a column ψ of `vecs`.
pub fn quad_form(m: &CMatrix, vecs: &CMatrix, k: usize) -> f64 {
    let psi = vecs.column(k);
    let mpsi = m * psi;
    psi.iter().zip(mpsi.iter()).map(|(a, b)| (a.conj() * b).re).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    /// +1 or −1.
    pub sign: f64,
    pub log_abs: f64,
    /// ln(max|u_ii| / min|u_ii|) from the LU factor; a cheap conditioning proxy.
    pub log_cond: f64,
}

/// Sign and log-magnitude of det(m) by LU with partial pivoting.
pub fn log_det(m: &RMatrix) -> Result<LogDet> {
    let n = m.nrows();
    let lu = m.clone().lu();
    let mut sign: f64 = lu.p().determinant();
    let mut log_abs = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    let u = lu.u();
    for i in 0..n {
        let d = u[(i, i)];
        if d == 0.0 || !d.is_finite() {
            return Err(Error::Singular { log_cond: f64::INFINITY });
        }
        if d < 0.0 {
            sign = -sign;
        }
        let a = d.abs();
        lo = lo.min(a);
        hi = hi.max(a);
        log_abs += math::ln(a);
    }
    let log_cond = if n == 0 { 0.0 } else { math::ln(hi / lo) };
    Ok(LogDet { sign, log_abs, log_cond })
}

/// Inverse through LU; fails on exact singularity or non-finite output.
pub fn inverse(m: &RMatrix) -> Result<RMatrix> {
    let inv = m.clone().lu().try_inverse().ok_or(Error::Singular { log_cond: f64::INFINITY })?;
    if inv.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular { log_cond: f64::INFINITY });
    }
    Ok(inv)
}
