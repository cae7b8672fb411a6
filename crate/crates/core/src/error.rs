use alloc::string::String;

/// Errors raised by the forecasting kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid system spec: {0}")]
    InvalidSpec(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("state diverged at step {step}")]
    Diverged { step: usize },
    #[error("ridge system is rank deficient (rank {rank} of {size})")]
    RankDeficient { rank: usize, size: usize },
    #[error("insufficient data: need at least {needed} rows, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("spectral radius estimate did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("training loss became non-finite at epoch {epoch}")]
    TrainingDiverged { epoch: usize },
    #[error("model has not been trained")]
    Untrained,
}

pub type Result<T> = core::result::Result<T, Error>;
