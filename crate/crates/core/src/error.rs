//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("input has dimension {got}, system expects {expected}")]
    InputDim { expected: usize, got: usize },

    #[error("state sequence has {got} entries, system has {expected}")]
    StateCount { expected: usize, got: usize },

    #[error("state {index} has dimension {got}, expected {expected}")]
    StateDim {
        index: usize,
        expected: usize,
        got: usize,
    },

    #[error("evaluator at step {step} returned {got} values, expected {expected}")]
    EvaluatorDim {
        step: usize,
        expected: usize,
        got: usize,
    },

    /// Raised as soon as any evaluator output is NaN or infinite.
    #[error("evaluator produced a non-finite value at step {step}")]
    NonFinite { step: usize },

    #[error("dependency mask at step {step} references index {index}, which is not earlier than {step}")]
    MaskNotTriangular { step: usize, index: usize },

    #[error("invalid partition: {reason}")]
    Partition { reason: String },

    #[error("invalid solver configuration: {reason}")]
    Config { reason: String },

    #[error("invalid cost model: {reason}")]
    Cost { reason: String },

    #[error("invalid model description: {reason}")]
    Model { reason: String },

    #[error("invalid argument: {reason}")]
    InvalidArgument { reason: String },

    #[error("iteration counts must be positive")]
    ZeroIterations,
}
