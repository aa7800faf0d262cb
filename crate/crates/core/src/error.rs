use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not positive-definite")]
    NotPositiveDefinite,

    #[error("matrix is singular")]
    Singular,

    #[error("matrix is not symmetric (entry ({row}, {col}) differs by {diff:e})")]
    NotSymmetric { row: usize, col: usize, diff: f64 },

    #[error("LP configuration error: {0}")]
    LpConfig(String),

    #[error("degenerate body: {0}")]
    Degenerate(String),

    #[error("containment check failed along direction {direction:?}: {detail}")]
    Containment { direction: Vec<f64>, detail: String },

    #[error("Monte Carlo estimate unusable: {0}")]
    MonteCarlo(String),

    #[error("iteration cap reached: {0}")]
    NoConvergence(String),

    #[error("body spec error at `{path}`: {message}")]
    Spec { path: String, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, got })
        }
    }
}
