use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vector belongs to space {found:?}, expected {expected:?}")]
    SpaceMismatch {
        expected: crate::space::SpaceId,
        found: crate::space::SpaceId,
    },
    #[error("expected {expected} values, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("non-finite entry at index {0}")]
    NonFinite(usize),
    #[error("state field has nonzero value {value} on boundary vertex {vertex}")]
    BoundaryNonzero { vertex: usize, value: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("matrix is not positive definite (pivot {value:e} at row {row})")]
    NotPositiveDefinite { row: usize, value: f64 },
    #[error("conjugate gradient stalled after {iterations} iterations (relative residual {residual:e})")]
    LinearSolveFailed { iterations: usize, residual: f64 },
    #[error("Newton iteration did not converge in {iterations} iterations (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },
    #[error("iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn at_iteration(self, iteration: usize) -> Self {
        Error::Iteration {
            iteration,
            source: Box::new(self),
        }
    }
}
