use alloc::string::String;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("potential undefined at x = {0} (log term)")]
    Domain(f64),
    #[error("degenerate spectrum: entries {i} and {j} coincide (gap {gap:e})")]
    Degenerate { i: usize, j: usize, gap: f64 },
    #[error("eigenvalue collision between particles {i} and {j}")]
    Collision { i: usize, j: usize },
    #[error("singular kernel matrix (log-condition estimate {log_cond:.1})")]
    Singular { log_cond: f64 },
    #[error("numerical breakdown: {0}")]
    Breakdown(String),
    #[error("divergence at iteration {iter}: second moment {m2:e}; try a smaller learning rate")]
    Divergence { iter: usize, m2: f64 },
    #[error("solver did not converge after {iters} iterations (residual {residual:e})")]
    NoConvergence { iters: usize, residual: f64 },
    #[error("{0} is outside the supported range")]
    Range(String),
    #[error("eigen-decomposition failed: {0}")]
    Eigen(String),
}

impl Error {
    /// Stable short code for reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Domain(_) => "domain",
            Error::Degenerate { .. } => "degenerate",
            Error::Collision { .. } => "collision",
            Error::Singular { .. } => "singular",
            Error::Breakdown(_) => "breakdown",
            Error::Divergence { .. } => "divergence",
            Error::NoConvergence { .. } => "no-convergence",
            Error::Range(_) => "range",
            Error::Eigen(_) => "eigen",
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: &str) -> Error {
    Error::InvalidArgument(String::from(msg))
}
