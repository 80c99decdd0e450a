use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Malformed configuration or request; maps to a usage error at the CLI.
    #[error("usage: {0}")]
    Usage(String),

    #[error("matrix is singular (smallest eigenvalue {lambda_min:e})")]
    Singular { lambda_min: f64 },

    #[error("scalar map undefined at eigenvalue {eigenvalue}")]
    DomainError { eigenvalue: f64 },

    #[error("eigendecomposition did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("experiment pool does not span R^{dim}")]
    NonSpanningPool { dim: usize },

    #[error("solver stopped after {iterations} iterations with certificate gap {gap:e}")]
    MaxIterExceeded { iterations: usize, gap: f64 },

    #[error("sample size {n} too small, need n > {threshold} (n_min = {n_min})")]
    SampleSizeTooSmall { n: u64, n_min: u64, threshold: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
