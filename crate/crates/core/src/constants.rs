//! Bound constants: block weights `w_n`, norming values `M_n`, the supremum
//! constants `rho` and its general-norming variant, plus the closed-form
//! lacunary and geometric constants.
//!
//! Both supremum constants have the shape
//!
//! ```text
//! C^p = sup_n  w_n * Σ_{k >= n} u_k
//! ```
//!
//! with `u_k = 1 / M_k` for `rho` and `u_k = (w_1 + ... + w_k)^(p-1) / M_k^p`
//! for the general form. The infinite sums are truncated after `L` terms and
//! padded with a tail bound; the supremum is scanned for `n <= K` and the
//! remainder `n > K` is bounded from the trailing increments of the
//! supremand. Every reported constant is the padded value, i.e. an upper
//! bound up to the detected-growth assumptions described on [`rho`].

use serde::{Deserialize, Serialize};

use crate::error::{HardyError, Result};
use crate::partitions::{AveragingConfig, ExtensionRule, NormingScheme};

/// Trailing window used to detect geometric decay and monotonicity.
const WINDOW: usize = 4;
/// A trailing ratio must sit this far below one to count as geometric decay.
const DECAY_MARGIN: f64 = 1e-9;
/// Hard cap on the number of blocks evaluated for one constant.
const MAX_TERMS: usize = 1 << 21;
/// Hard cap on the scanned supremum range.
const MAX_SCAN: usize = 1 << 16;

/// A constant together with how it was truncated.
///
/// `tail_bound` is measured in units of the supremand, i.e. of `constant^p`.
/// Non-finite values serialize as JSON `null`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub constant: f64,
    pub truncation_level: usize,
    pub tail_bound: f64,
    pub converged: bool,
}

impl BoundReport {
    /// A closed-form constant with nothing truncated.
    pub fn exact(constant: f64) -> Self {
        Self {
            constant,
            truncation_level: 0,
            tail_bound: 0.0,
            converged: true,
        }
    }

    fn divergent(truncation_level: usize) -> Self {
        Self {
            constant: f64::INFINITY,
            truncation_level,
            tail_bound: f64::INFINITY,
            converged: false,
        }
    }
}

/// Per-block quantities along the partition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockData {
    /// 1-based block index `k`.
    pub index: usize,
    /// `|N_k|`.
    pub length: f64,
    /// `n_k`.
    pub boundary: f64,
    /// `w_k`.
    pub weight: f64,
    /// `w_1 + ... + w_k`.
    pub cumulative_weight: f64,
    /// `M_k`.
    pub norming: f64,
}

/// Walks the blocks of a config, finite when the partition has no extension.
pub struct Blocks<'a> {
    config: &'a AveragingConfig,
    next: usize,
    previous_boundary: f64,
    cumulative: f64,
}

impl Iterator for Blocks<'_> {
    type Item = BlockData;

    fn next(&mut self) -> Option<BlockData> {
        let k = self.next;
        let length = self.config.partition.block_length(k).ok()?;
        let boundary = self.config.partition.boundary(k).ok()?;
        let start = self.previous_boundary + 1.0;
        let q = self.config.q();
        let weight = self
            .config
            .weights
            .block_power_sum(start, length, q)
            .powf(1.0 / q);
        self.cumulative += weight;
        let norming = match self.config.norming {
            NormingScheme::Derived => self.cumulative,
            NormingScheme::Power { alpha } => (k as f64).powf(alpha),
            NormingScheme::RootOfBoundary => boundary.powf(1.0 / q),
        };
        self.next += 1;
        self.previous_boundary = boundary;
        Some(BlockData {
            index: k,
            length,
            boundary,
            weight,
            cumulative_weight: self.cumulative,
            norming,
        })
    }
}

pub fn blocks(config: &AveragingConfig) -> Blocks<'_> {
    Blocks {
        config,
        next: 1,
        previous_boundary: 0.0,
        cumulative: 0.0,
    }
}

/// `w_n = (Σ_{j ∈ N_n} m_j^q)^(1/q)`.
pub fn block_weight(config: &AveragingConfig, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(HardyError::OutOfRange {
            index: 0,
            available: config.partition.len(),
        });
    }
    let length = config.partition.block_length(n)?;
    let start = config.partition.boundary(n - 1)? + 1.0;
    let q = config.q();
    Ok(config
        .weights
        .block_power_sum(start, length, q)
        .powf(1.0 / q))
}

/// `M_n`: `w_1 + ... + w_n` for derived norming, otherwise the explicit rule.
pub fn cumulative_m(config: &AveragingConfig, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(HardyError::OutOfRange {
            index: 0,
            available: config.partition.len(),
        });
    }
    match config.norming {
        NormingScheme::Derived => {
            let mut total = 0.0;
            for k in 1..=n {
                total += block_weight(config, k)?;
            }
            Ok(total)
        }
        NormingScheme::Power { alpha } => {
            config.partition.block_length(n)?;
            Ok((n as f64).powf(alpha))
        }
        NormingScheme::RootOfBoundary => Ok(config.partition.boundary(n)?.powf(1.0 / config.q())),
    }
}

/// `rho = sup_n (w_n Σ_{j >= n} 1 / M_j)^(1/p)` for derived norming.
///
/// The tail `Σ_{j > L} 1/M_j` is bounded geometrically: with `δ` the largest
/// ratio `(1/M_{j+1}) / (1/M_j)` over the last few computed terms, the tail is
/// at most `last * δ' / (1 - δ')` where `δ' = (1 + δ) / 2` sits halfway
/// between the observed ratio and one. When the blocks eventually have
/// constant length and constant weights, `M_j` grows linearly and the
/// report signals divergence. The supremum over `n` beyond the scanned range
/// is bounded the same way from the trailing increments of the supremand.
///
/// `tol` bounds the total neglected contribution to `rho^p`.
pub fn rho(config: &AveragingConfig, tol: f64) -> Result<BoundReport> {
    if config.norming != NormingScheme::Derived {
        return Err(HardyError::NormingMismatch);
    }
    supremum(config, Summand::InverseNorming, tol)
}

/// `sup_n (w_n Σ_{k >= n} (w_1 + ... + w_k)^(p-1) / M_k^p)^(1/p)` for any
/// norming. With derived norming every term collapses to `w_n / M_k`, so
/// this agrees with [`rho`].
///
/// Power norming on eventually-singleton-like blocks (constant length and
/// constant weights) uses an integral-test tail instead of the geometric one.
pub fn generalized_rho(config: &AveragingConfig, tol: f64) -> Result<BoundReport> {
    supremum(config, Summand::General, tol)
}

/// `r^(1/q) / (r^(1/q) - 1)`, the constant for lacunary boundaries of ratio `r`.
pub fn lacunary_bound(r: f64, q: f64) -> Result<f64> {
    if !(r.is_finite() && r > 1.0) {
        return Err(HardyError::InvalidRatio(r));
    }
    if !(q.is_finite() && q > 1.0) {
        return Err(HardyError::InvalidExponent(q));
    }
    let root = r.powf(1.0 / q);
    Ok(root / (root - 1.0))
}

/// `(√b + 1) / √(b - 1)`, the sharp constant for boundaries `n_k = b^k` at `p = 2`.
pub fn geometric_sharp_constant(b: u64) -> Result<f64> {
    if b < 2 {
        return Err(HardyError::InvalidBase(b));
    }
    let b = b as f64;
    Ok((b.sqrt() + 1.0) / (b - 1.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Summand {
    /// `1 / M_k`
    InverseNorming,
    /// `(w_1 + ... + w_k)^(p-1) / M_k^p`
    General,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tail {
    /// `Σ_{k > L} u_k` lies in `[upper - width, upper]`.
    Bound {
        upper: f64,
        width: f64,
    },
    Divergent,
    Unknown,
}

/// Blocks eventually have length `length` and weights `weight`, starting at
/// block `from_block`.
#[derive(Debug, Clone, Copy)]
struct LinearRegime {
    from_block: usize,
    block_weight: f64,
}

/// First block from which both the partition and the weights follow their
/// extension rules.
fn settle_block(config: &AveragingConfig) -> usize {
    let listed_weights = match &config.weights {
        crate::partitions::WeightScheme::Explicit { values, .. } => values.len(),
        _ => 0,
    };
    let mut k = config.partition.len() + 1;
    while let Ok(b) = config.partition.boundary(k - 1) {
        if b >= listed_weights as f64 {
            break;
        }
        k += 1;
    }
    k
}

fn linear_regime(config: &AveragingConfig) -> Option<LinearRegime> {
    let Some(ExtensionRule::Constant { length }) = config.partition.extension() else {
        return None;
    };
    let (weight, _) = config.weights.eventual_constant()?;
    Some(LinearRegime {
        from_block: settle_block(config),
        block_weight: weight * (length as f64).powf(1.0 / config.q()),
    })
}

struct Supremand<'a> {
    config: &'a AveragingConfig,
    summand: Summand,
    blocks: Blocks<'a>,
    linear: Option<LinearRegime>,
    weight: Vec<f64>,
    cumulative: Vec<f64>,
    terms: Vec<f64>,
}

impl<'a> Supremand<'a> {
    fn new(config: &'a AveragingConfig, summand: Summand) -> Self {
        Self {
            config,
            summand,
            blocks: blocks(config),
            linear: linear_regime(config),
            weight: Vec::new(),
            cumulative: Vec::new(),
            terms: Vec::new(),
        }
    }

    /// Extends the computed terms to `n`; false when values stop being finite.
    fn extend_to(&mut self, n: usize) -> bool {
        let p = self.config.p();
        while self.terms.len() < n {
            let Some(block) = self.blocks.next() else {
                return false;
            };
            let term = match self.summand {
                Summand::InverseNorming => 1.0 / block.norming,
                Summand::General => block.cumulative_weight.powf(p - 1.0) / block.norming.powf(p),
            };
            if !(term.is_finite() && block.weight.is_finite() && term > 0.0) {
                return false;
            }
            self.weight.push(block.weight);
            self.cumulative.push(block.cumulative_weight);
            self.terms.push(term);
        }
        true
    }

    /// Bound on `Σ_{k > L} u_k` where `L` is the number of computed terms.
    fn tail(&self) -> Tail {
        let l = self.terms.len();
        if let Some(regime) = self.linear {
            if l < regime.from_block {
                return Tail::Unknown;
            }
            let alpha = match self.config.norming {
                NormingScheme::Power { alpha } if self.summand == Summand::General => alpha,
                // M_k grows at most linearly: Σ 1/M_k or its general analogue diverges.
                _ => return Tail::Divergent,
            };
            let p = self.config.p();
            // u_k = S_k^(p-1) / k^(alpha p) with S_k = w (k + c) for k >= L.
            let s = alpha * p - p + 1.0;
            if s <= 1.0 {
                return Tail::Divergent;
            }
            // For k > L, (k + c) / k lies between 1 and 1 + c / (L + 1), and
            // Σ_{k > L} k^-s between the integrals from L + 1 and from L.
            let w = regime.block_weight;
            let lf = l as f64;
            let c = self.cumulative[l - 1] / w - lf;
            let shift = (1.0 + c / (lf + 1.0)).powf(p - 1.0);
            let (shift_lo, shift_hi) = if c > 0.0 { (1.0, shift) } else { (shift, 1.0) };
            let scale = w.powf(p - 1.0) / (s - 1.0);
            let upper = scale * shift_hi * lf.powf(1.0 - s);
            let lower = scale * shift_lo * (lf + 1.0).powf(1.0 - s);
            return Tail::Bound {
                upper,
                width: upper - lower,
            };
        }
        if l < WINDOW + 1 {
            return Tail::Unknown;
        }
        let ratio = self.terms[l - WINDOW - 1..]
            .windows(2)
            .map(|pair| pair[1] / pair[0])
            .fold(0.0_f64, f64::max);
        if ratio < 1.0 - DECAY_MARGIN {
            let padded = 0.5 * (1.0 + ratio);
            let upper = self.terms[l - 1] * padded / (1.0 - padded);
            Tail::Bound {
                upper,
                width: upper,
            }
        } else {
            Tail::Unknown
        }
    }
}

/// Bound on `sup_{n > K} σ_n` in excess of `σ_K`, from the trailing increments.
fn beyond_scan(sigma: &[f64]) -> Option<f64> {
    let k = sigma.len();
    if k < WINDOW + 1 {
        return None;
    }
    let last = sigma[k - 1];
    let increments: Vec<f64> = sigma[k - WINDOW - 1..]
        .windows(2)
        .map(|pair| pair[1] - pair[0])
        .collect();
    let noise = 8.0 * f64::EPSILON * last.abs();
    if increments.iter().all(|&d| d <= 0.0) {
        return Some(0.0);
    }
    if increments.iter().all(|&d| d <= noise) {
        return Some(noise);
    }
    if increments.iter().all(|&d| d > 0.0) {
        let ratio = increments
            .windows(2)
            .map(|pair| pair[1] / pair[0])
            .fold(0.0_f64, f64::max);
        if ratio < 1.0 - DECAY_MARGIN {
            let padded = 0.5 * (1.0 + ratio);
            return Some(increments[WINDOW - 1] * padded / (1.0 - padded));
        }
    }
    None
}

fn supremum(config: &AveragingConfig, summand: Summand, tol: f64) -> Result<BoundReport> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(HardyError::InvalidTolerance(tol));
    }
    if config.partition.extension().is_none() {
        return Err(HardyError::TailUnboundable);
    }
    let p = config.p();
    let mut sup = Supremand::new(config, summand);
    let mut scan = (settle_block(config) + WINDOW + 4).max(8);
    let mut terms = 2 * scan;
    let mut best = f64::INFINITY;

    while scan <= MAX_SCAN {
        // Grow the summation range until the tail is negligible for every n <= scan.
        let (tail, tail_width) = loop {
            if !sup.extend_to(terms) {
                return Ok(BoundReport {
                    constant: best,
                    truncation_level: scan,
                    tail_bound: f64::INFINITY,
                    converged: false,
                });
            }
            let w_max = sup.weight[..scan].iter().copied().fold(0.0_f64, f64::max);
            match sup.tail() {
                Tail::Divergent => return Ok(BoundReport::divergent(scan)),
                Tail::Bound { upper, width } if w_max * width <= 0.5 * tol => break (upper, width),
                _ if terms >= MAX_TERMS => {
                    return Ok(BoundReport {
                        constant: best,
                        truncation_level: scan,
                        tail_bound: f64::INFINITY,
                        converged: false,
                    })
                }
                _ => terms = (2 * terms).min(MAX_TERMS),
            }
        };
        let w_max = sup.weight[..scan].iter().copied().fold(0.0_f64, f64::max);

        // Suffix sums, accumulated from the far end.
        let mut suffix = vec![0.0; scan];
        let mut acc = tail;
        for k in (scan..terms).rev() {
            acc += sup.terms[k];
        }
        for n in (0..scan).rev() {
            acc += sup.terms[n];
            suffix[n] = acc;
        }
        let sigma: Vec<f64> = suffix.iter().zip(&sup.weight).map(|(s, w)| s * w).collect();
        let scanned_max = sigma.iter().copied().fold(0.0_f64, f64::max);

        if let Some(extra) = beyond_scan(&sigma) {
            let value = scanned_max.max(sigma[scan - 1] + extra);
            best = value.powf(1.0 / p);
            if extra <= 0.5 * tol {
                return Ok(BoundReport {
                    constant: best,
                    truncation_level: scan,
                    tail_bound: w_max * tail_width + extra,
                    converged: true,
                });
            }
        } else {
            best = scanned_max.powf(1.0 / p);
        }
        scan = scan + scan / 2;
        terms = terms.max(2 * scan);
    }

    Ok(BoundReport {
        constant: best,
        truncation_level: MAX_SCAN,
        tail_bound: f64::INFINITY,
        converged: false,
    })
}
