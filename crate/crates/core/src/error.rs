use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),

    #[error("eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("subsystem index {index} out of range for {count} subsystems")]
    SubsystemOutOfRange { index: usize, count: usize },

    #[error("bad partition: {0}")]
    BadPartition(String),

    #[error("channel is not trace preserving (defect {0:.3e})")]
    NotTracePreserving(f64),

    #[error("operation is not trace non-increasing (excess {0:.3e})")]
    NotTraceNonIncreasing(f64),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("dimension budget exceeded: {required} > {budget}")]
    BudgetExceeded { required: usize, budget: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed channel description: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
