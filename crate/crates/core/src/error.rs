use std::io;

use thiserror::Error;

/// Errors produced by the library.
///
/// Variants are grouped by the kind of failure rather than by module so that
/// callers (the CLI and the C interface) can map them onto a small set of exit
/// or status codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid matrix structure: {0}")]
    InvalidStructure(String),

    #[error("matrix is not symmetric (max asymmetry {max_asymmetry:e})")]
    NotSymmetric { max_asymmetry: f64 },

    #[error("operator is not symmetrizable by a diagonal similarity: {0}")]
    NotSymmetrizable(String),

    #[error("matrix dimension {dim} exceeds the dense limit {limit}")]
    TooLarge { dim: usize, limit: usize },

    #[error("zero diagonal entry at row {row}")]
    ZeroDiagonal { row: usize },

    #[error("initial preconditioned residual is zero")]
    ZeroInitialResidual,

    #[error("Cholesky factorization failed at pivot {index} (pivot value {pivot:e})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("extreme eigenvalues have opposite signs (lambda_min = {lambda_min}, lambda_max = {lambda_max})")]
    MixedSignSpectrum { lambda_min: f64, lambda_max: f64 },

    #[error("ill-conditioned Gram matrix (condition number {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("no relaxation weight in the search range converged")]
    NoConvergentOmega,

    #[error("solver stopped without converging: {0}")]
    NotConverged(String),

    #[error("verification failed: {0}")]
    CheckFailed(String),

    #[error("no finite objective value found during hyperparameter search")]
    DegenerateData,

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// True for failures caused by bad input or configuration, as opposed to
    /// numerical breakdown.
    pub fn is_usage_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_) | Error::Parse { .. } | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
