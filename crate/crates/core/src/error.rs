use thiserror::Error;

/// Errors produced anywhere in the optimization stack.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid search domain: {0}")]
    InvalidDomain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point lies outside the search box")]
    OutsideDomain,

    #[error("correlation matrix is not positive definite (jitter escalated to {jitter:e})")]
    NotPositiveDefinite { jitter: f64 },

    #[error("need at least {needed} training points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("objective evaluation failed: {0}")]
    Objective(String),

    #[error("Hilbert-space sector dimension {dim} exceeds the cap of {cap}")]
    SectorTooLarge { dim: usize, cap: usize },

    #[error("unknown problem id `{0}`")]
    UnknownProblem(String),

    #[error("unsupported objective configuration: {0}")]
    Unsupported(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for OptError {
    fn from(e: std::io::Error) -> Self {
        OptError::Io(e.to_string())
    }
}

impl From<csv::Error> for OptError {
    fn from(e: csv::Error) -> Self {
        OptError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for OptError {
    fn from(e: serde_json::Error) -> Self {
        OptError::Io(e.to_string())
    }
}

pub type Result<T, E = OptError> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(OptError::DimensionMismatch { expected, got })
    }
}
