use thiserror::Error;

/// Errors raised while building configurations or evaluating constants and operators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum HardyError {
    #[error("invalid exponent p = {0}: require 1 < p < inf")]
    InvalidExponent(f64),

    #[error("invalid base b = {0}: require an integer b >= 2")]
    InvalidBase(u64),

    #[error("invalid lacunary ratio r = {0}: require r > 1")]
    InvalidRatio(f64),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid norming: {0}")]
    InvalidNorming(String),

    #[error("block {index} lies beyond the {available} explicit blocks and the partition has no extension rule")]
    OutOfRange { index: usize, available: usize },

    #[error("tail of the constant cannot be bounded: the partition has no extension rule")]
    TailUnboundable,

    #[error("rho requires the derived norming M_n = w_1 + ... + w_n")]
    NormingMismatch,

    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),

    #[error("bound constant did not converge; refusing to verify against it")]
    DivergedConstant,

    #[error("operator norm estimation supports only p = 2, got p = {0}")]
    UnsupportedExponent(f64),

    #[error("sequence entries must be finite")]
    NonFiniteSequence,

    #[error("invalid extremal parameters: {0}")]
    InvalidParams(String),

    #[error("grid must be sorted strictly decreasing toward sqrt(b)")]
    UnsortedGrid,

    #[error("problem too large to materialize: {0} entries")]
    TooLarge(f64),

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, HardyError>;
