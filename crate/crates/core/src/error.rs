//! Error type shared across the crate.

/// Errors reported by constructors, projections, schedules and the solver.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid set: {0}")]
    InvalidSet(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid kappa: {0}")]
    InvalidKappa(String),

    #[error("schedule has no entry for n = {index}: {reason}")]
    ScheduleIndex { index: usize, reason: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
