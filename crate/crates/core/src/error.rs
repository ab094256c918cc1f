use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension for {what}: got {got}, need at least {min}")]
    InvalidDimension {
        what: &'static str,
        got: usize,
        min: usize,
    },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} did not converge (diagnostic {diagnostic:.3e})")]
    Convergence { what: String, diagnostic: f64 },

    #[error("operator is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("characteristic function vanishes at a stabilizer point: squeezing is infinite")]
    InfiniteSqueezing,

    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
