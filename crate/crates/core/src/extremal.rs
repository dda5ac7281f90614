//! The block-constant family `a_j = r^{-k}` for `j ∈ N_k` on the geometric
//! partition `n_k = b^k`, its closed-form series, and the sweep `r ↓ √b` that
//! pushes the ratio `‖T a‖_2 / ‖a‖_2` up to `(√b + 1) / √(b - 1)`.
//!
//! Parameters are restricted to `√b < r < b`. The closed forms have a
//! removable singularity at `r = b`, which is excluded rather than special-cased.

use serde::{Deserialize, Serialize};

use crate::constants::geometric_sharp_constant;
use crate::error::{HardyError, Result};
use crate::operator::TruncatedSequence;

const MAX_LEN: u64 = 1 << 28;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremalParams {
    b: u64,
    r: f64,
}

impl ExtremalParams {
    pub fn new(b: u64, r: f64) -> Result<Self> {
        if b < 2 {
            return Err(HardyError::InvalidBase(b));
        }
        let bf = b as f64;
        if !(r.is_finite() && r * r > bf && r > bf.sqrt() && r < bf) {
            return Err(HardyError::InvalidParams(format!(
                "need sqrt({b}) < r < {b}, got r = {r}"
            )));
        }
        Ok(Self { b, r })
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    pub fn r(&self) -> f64 {
        self.r
    }
}

/// `(a_1, ..., a_{b^K})` with `a_j = r^{-k}` on `N_k`.
pub fn extremal_sequence(params: &ExtremalParams, blocks: usize) -> Result<TruncatedSequence> {
    if blocks == 0 {
        return Err(HardyError::InvalidParams("need at least one block".into()));
    }
    let len = params
        .b
        .checked_pow(blocks as u32)
        .filter(|&n| n <= MAX_LEN)
        .ok_or_else(|| HardyError::TooLarge((params.b as f64).powi(blocks as i32)))?;
    let mut values = Vec::with_capacity(len as usize);
    let mut boundary = 1u64;
    for k in 1..=blocks {
        let next = boundary * params.b;
        let start = if k == 1 { 0 } else { boundary };
        let value = params.r.powi(-(k as i32));
        values.extend(std::iter::repeat_n(value, (next - start) as usize));
        boundary = next;
    }
    TruncatedSequence::from_real(&values)
}

/// `Σ |a_n|^2 = b (r^2 - 1) / (r^2 (r^2 - b))`.
pub fn extremal_l2_norm_sq(params: &ExtremalParams) -> f64 {
    let b = params.b as f64;
    let r2 = params.r * params.r;
    b * (r2 - 1.0) / (r2 * (r2 - b))
}

/// `Σ_k |n_k^{-1/2} Σ_{j <= n_k} a_j|^2` in closed form.
pub fn extremal_lhs_sum(params: &ExtremalParams) -> f64 {
    let b = params.b as f64;
    let r = params.r;
    let r2 = r * r;
    let lead = b * b / (r2 * (r - b) * (r - b));
    lead * ((r - 1.0).powi(2) / (b - 1.0) - 2.0 * r * (b - 1.0) / b
        + r2 * (b - 1.0).powi(2) / (b * (r2 - b)))
}

/// The `k`-th summand `|n_k^{-1/2} Σ_{j <= n_k} a_j|^2`, expanded into its
/// three geometric pieces in `(1/b)^k`, `(1/r)^k` and `(b/r^2)^k`.
pub fn extremal_block_term(params: &ExtremalParams, k: usize) -> f64 {
    let b = params.b as f64;
    let r = params.r;
    let k = k as i32;
    let lead = ((r - 1.0) / (r - b)).powi(2);
    lead * (b * b / (r * r) * b.powi(-k) - 2.0 * b * (b - 1.0) / (r * (r - 1.0)) * r.powi(-k)
        + ((b - 1.0) / (r - 1.0)).powi(2) * (b / (r * r)).powi(k))
}

/// `‖T a‖_2 / ‖a‖_2` for the family member at `r`.
pub fn extremal_ratio(params: &ExtremalParams) -> f64 {
    (extremal_lhs_sum(params) / extremal_l2_norm_sq(params)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub r: f64,
    pub ratio: f64,
    pub sharp_constant: f64,
    /// `sharp_constant - ratio`
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub b: u64,
    pub rows: Vec<SweepRow>,
    /// Grid points outside `√b < r < b`.
    pub skipped: Vec<f64>,
}

/// Evaluates the ratio along a grid decreasing toward `√b`.
pub fn sharpness_sweep(b: u64, grid: &[f64]) -> Result<SweepTable> {
    let sharp = geometric_sharp_constant(b)?;
    if grid
        .windows(2)
        .any(|pair| pair[1].partial_cmp(&pair[0]) != Some(std::cmp::Ordering::Less))
    {
        return Err(HardyError::UnsortedGrid);
    }
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for &r in grid {
        match ExtremalParams::new(b, r) {
            Ok(params) => {
                let ratio = extremal_ratio(&params);
                rows.push(SweepRow {
                    r,
                    ratio,
                    sharp_constant: sharp,
                    gap: sharp - ratio,
                });
            }
            Err(_) => skipped.push(r),
        }
    }
    Ok(SweepTable { b, rows, skipped })
}

/// A grid starting halfway into `(√b, b)` and closing in on `√b` by
/// factors of ten.
pub fn default_grid(b: u64, points: usize) -> Vec<f64> {
    let lo = (b as f64).sqrt();
    let width = 0.5 * (b as f64 - lo);
    (0..points)
        .map(|i| lo + width * 10f64.powi(-(i as i32)))
        .collect()
}
