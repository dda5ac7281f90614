//! Weighted Hardy-type averaging operators on ℓ^p sequences.
//!
//! Given a partition of the positive integers into consecutive blocks
//! `N_1, N_2, ...`, positive weights `m_j` and divisors `M_n`, the operator
//!
//! ```text
//! (T a)_n = M_n^{-1} Σ_{j ∈ N_1 ∪ ... ∪ N_n} m_j a_j
//! ```
//!
//! is bounded on ℓ^p with constants computed in [`constants`]. The crate
//! computes those constants with certified truncation, checks the inequality
//! on concrete sequences, estimates truncated operator norms, and evaluates
//! the extremal family that pins down the sharp constant for `n_k = b^k`.

pub mod cli;
pub mod config;
pub mod constants;
pub mod error;
pub mod extremal;
pub mod operator;
pub mod partitions;

pub use constants::{
    block_weight, cumulative_m, generalized_rho, geometric_sharp_constant, lacunary_bound, rho,
    BoundReport,
};
pub use error::{HardyError, Result};
pub use extremal::{
    extremal_l2_norm_sq, extremal_lhs_sum, extremal_sequence, sharpness_sweep, ExtremalParams,
    SweepRow, SweepTable,
};
pub use operator::{
    apply_operator, lp_norm, truncated_operator_norm, verify_main_inequality, NormEstimate,
    TruncatedOperator, TruncatedSequence, VerificationReport,
};
pub use partitions::{
    conjugate_exponent, geometric_partition, lacunary_partition, singleton_partition,
    AveragingConfig, ExponentPair, ExtensionRule, NormingScheme, Partition, WeightScheme,
};
