//! Partitions of the positive integers into consecutive blocks, weight
//! sequences, conjugate exponents and norming sequences.
//!
//! Everything here is 1-indexed at the interface: block `k` is `N_k`, index
//! `j` is the `j`-th term of a sequence. Blocks are stored as a finite list of
//! lengths plus an optional [`ExtensionRule`] that generates the blocks past
//! the list. Quantities that can grow past `u64` (boundaries of far-out
//! geometric blocks) are reported as `f64`.

use crate::error::{HardyError, Result};

const CONJUGACY_TOL: f64 = 1e-12;

/// Returns the Hölder conjugate `q = p / (p - 1)`.
pub fn conjugate_exponent(p: f64) -> Result<f64> {
    if !(p.is_finite() && p > 1.0) {
        return Err(HardyError::InvalidExponent(p));
    }
    Ok(p / (p - 1.0))
}

/// A pair of conjugate exponents `1/p + 1/q = 1`, both strictly above one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentPair {
    p: f64,
    q: f64,
}

impl ExponentPair {
    pub fn from_p(p: f64) -> Result<Self> {
        let q = conjugate_exponent(p)?;
        Self::new(p, q)
    }

    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(HardyError::InvalidExponent(p));
        }
        if !(q.is_finite() && q > 1.0) {
            return Err(HardyError::InvalidExponent(q));
        }
        if (1.0 / p + 1.0 / q - 1.0).abs() > CONJUGACY_TOL {
            return Err(HardyError::InvalidExponent(p));
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

/// How blocks continue past the explicit list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtensionRule {
    /// Boundaries grow by an integer factor: `n_{k+1} = ratio * n_k`.
    Geometric { ratio: u64 },
    /// Every further block has the same length.
    Constant { length: u64 },
}

impl ExtensionRule {
    fn validate(&self) -> Result<()> {
        match *self {
            ExtensionRule::Geometric { ratio } if ratio < 2 => Err(HardyError::InvalidPartition(
                format!("geometric extension ratio must be >= 2, got {ratio}"),
            )),
            ExtensionRule::Constant { length: 0 } => Err(HardyError::InvalidPartition(
                "constant extension length must be >= 1".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// A partition `N = N_1 ∪ N_2 ∪ ...` into consecutive blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    block_lengths: Vec<u64>,
    boundaries: Vec<u64>,
    extension: Option<ExtensionRule>,
}

impl Partition {
    pub fn new(block_lengths: Vec<u64>, extension: Option<ExtensionRule>) -> Result<Self> {
        if block_lengths.is_empty() {
            return Err(HardyError::InvalidPartition("no blocks".into()));
        }
        if let Some(pos) = block_lengths.iter().position(|&len| len == 0) {
            return Err(HardyError::InvalidPartition(format!(
                "block {} has length 0",
                pos + 1
            )));
        }
        if let Some(rule) = &extension {
            rule.validate()?;
        }
        let mut boundaries = Vec::with_capacity(block_lengths.len());
        let mut acc: u64 = 0;
        for &len in &block_lengths {
            acc = acc
                .checked_add(len)
                .ok_or_else(|| HardyError::InvalidPartition("boundary overflows u64".into()))?;
            boundaries.push(acc);
        }
        Ok(Self {
            block_lengths,
            boundaries,
            extension,
        })
    }

    /// Builds the partition from its boundaries `n_1 < n_2 < ...`.
    pub fn from_boundaries(boundaries: &[u64], extension: Option<ExtensionRule>) -> Result<Self> {
        if boundaries.is_empty() {
            return Err(HardyError::InvalidPartition("no boundaries".into()));
        }
        if boundaries[0] == 0 {
            return Err(HardyError::InvalidPartition(
                "boundaries must be positive".into(),
            ));
        }
        let mut lengths = Vec::with_capacity(boundaries.len());
        let mut prev = 0u64;
        for (i, &n) in boundaries.iter().enumerate() {
            if n <= prev {
                return Err(HardyError::InvalidPartition(format!(
                    "boundaries must be strictly increasing (position {})",
                    i + 1
                )));
            }
            lengths.push(n - prev);
            prev = n;
        }
        Self::new(lengths, extension)
    }

    pub fn with_extension(mut self, extension: Option<ExtensionRule>) -> Result<Self> {
        if let Some(rule) = &extension {
            rule.validate()?;
        }
        self.extension = extension;
        Ok(self)
    }

    /// Number of explicitly stored blocks.
    pub fn len(&self) -> usize {
        self.block_lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.block_lengths.is_empty()
    }

    pub fn block_lengths(&self) -> &[u64] {
        &self.block_lengths
    }

    /// Explicit boundaries `n_k = |N_1| + ... + |N_k|`.
    pub fn boundaries(&self) -> &[u64] {
        &self.boundaries
    }

    pub fn extension(&self) -> Option<ExtensionRule> {
        self.extension
    }

    /// `|N_k|` for `k >= 1`, continuing through the extension rule.
    pub fn block_length(&self, k: usize) -> Result<f64> {
        assert!(k >= 1, "blocks are 1-indexed");
        if k <= self.len() {
            return Ok(self.block_lengths[k - 1] as f64);
        }
        let last = *self.boundaries.last().expect("non-empty") as f64;
        let steps = (k - self.len()) as i32;
        match self.extension {
            Some(ExtensionRule::Geometric { ratio }) => {
                let r = ratio as f64;
                Ok(last * r.powi(steps - 1) * (r - 1.0))
            }
            Some(ExtensionRule::Constant { length }) => Ok(length as f64),
            None => Err(HardyError::OutOfRange {
                index: k,
                available: self.len(),
            }),
        }
    }

    /// `n_k` for `k >= 1` (and `n_0 = 0`), continuing through the extension rule.
    pub fn boundary(&self, k: usize) -> Result<f64> {
        if k == 0 {
            return Ok(0.0);
        }
        if k <= self.len() {
            return Ok(self.boundaries[k - 1] as f64);
        }
        let last = *self.boundaries.last().expect("non-empty") as f64;
        let steps = (k - self.len()) as i32;
        match self.extension {
            Some(ExtensionRule::Geometric { ratio }) => Ok(last * (ratio as f64).powi(steps)),
            Some(ExtensionRule::Constant { length }) => Ok(last + steps as f64 * length as f64),
            None => Err(HardyError::OutOfRange {
                index: k,
                available: self.len(),
            }),
        }
    }

    /// Integer boundaries `n_1, ..., n_k` for the first `k` blocks.
    pub fn boundaries_upto(&self, k: usize) -> Result<Vec<u64>> {
        let mut out = Vec::with_capacity(k);
        for i in 1..=k {
            let b = self.boundary(i)?;
            if b > (1u64 << 53) as f64 {
                return Err(HardyError::TooLarge(b));
            }
            out.push(b as u64);
        }
        Ok(out)
    }

    /// Number of complete blocks contained in `{1, ..., n}`.
    pub fn complete_blocks_within(&self, n: usize) -> usize {
        let n = n as f64;
        let mut k = 0;
        while let Ok(b) = self.boundary(k + 1) {
            if b > n {
                break;
            }
            k += 1;
        }
        k
    }

    /// Smallest ratio `n_{k+1} / n_k` over the explicit boundaries and, if
    /// present, the geometric extension.
    pub fn min_boundary_ratio(&self) -> Option<f64> {
        let explicit = self
            .boundaries
            .windows(2)
            .map(|w| w[1] as f64 / w[0] as f64)
            .fold(None, |acc: Option<f64>, r| {
                Some(acc.map_or(r, |a| a.min(r)))
            });
        match self.extension {
            Some(ExtensionRule::Geometric { ratio }) => {
                let r = ratio as f64;
                Some(explicit.map_or(r, |a| a.min(r)))
            }
            Some(ExtensionRule::Constant { .. }) => Some(1.0),
            None => explicit,
        }
    }
}

/// `N_1 = {1..b}`, `N_k = {b^{k-1}+1 .. b^k}` for `k <= blocks`, continued geometrically.
pub fn geometric_partition(b: u64, blocks: usize) -> Result<Partition> {
    if b < 2 {
        return Err(HardyError::InvalidBase(b));
    }
    if blocks == 0 {
        return Err(HardyError::InvalidPartition(
            "need at least one block".into(),
        ));
    }
    let mut lengths = Vec::with_capacity(blocks);
    let mut prev = 1u64;
    for k in 1..=blocks {
        let cur = b
            .checked_pow(k as u32)
            .ok_or_else(|| HardyError::InvalidPartition(format!("{b}^{k} overflows u64")))?;
        lengths.push(if k == 1 { cur } else { cur - prev });
        prev = cur;
    }
    Partition::new(lengths, Some(ExtensionRule::Geometric { ratio: b }))
}

/// Partition from lacunary boundaries together with the best gap ratio
/// `r = min_k n_{k+1} / n_k`. The result carries no extension rule.
pub fn lacunary_partition(boundaries: &[u64]) -> Result<(Partition, f64)> {
    if boundaries.len() < 2 {
        return Err(HardyError::InvalidPartition(
            "need at least two boundaries to certify a ratio".into(),
        ));
    }
    let partition = Partition::from_boundaries(boundaries, None)?;
    let r = partition
        .min_boundary_ratio()
        .expect("two or more boundaries");
    Ok((partition, r))
}

/// `N_k = {k}` for `k <= blocks`, continued with singletons.
pub fn singleton_partition(blocks: usize) -> Result<Partition> {
    if blocks == 0 {
        return Err(HardyError::InvalidPartition(
            "need at least one block".into(),
        ));
    }
    Partition::new(vec![1; blocks], Some(ExtensionRule::Constant { length: 1 }))
}

/// Positive weights `m_j`.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightScheme {
    ConstantOne,
    /// `m_j = values[j-1]` for `j <= values.len()`, and `tail` afterwards.
    Explicit {
        values: Vec<f64>,
        tail: f64,
    },
    /// `m_j = scale * ratio^(j-1)`.
    Geometric {
        scale: f64,
        ratio: f64,
    },
}

impl WeightScheme {
    pub fn explicit(values: Vec<f64>, tail: f64) -> Result<Self> {
        if let Some(pos) = values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(HardyError::InvalidWeights(format!(
                "m_{} = {} is not a positive finite number",
                pos + 1,
                values[pos]
            )));
        }
        if !(tail.is_finite() && tail > 0.0) {
            return Err(HardyError::InvalidWeights(format!(
                "tail weight {tail} is not a positive finite number"
            )));
        }
        Ok(WeightScheme::Explicit { values, tail })
    }

    pub fn geometric(scale: f64, ratio: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0 && ratio.is_finite() && ratio > 0.0) {
            return Err(HardyError::InvalidWeights(format!(
                "geometric weights need scale > 0 and ratio > 0, got ({scale}, {ratio})"
            )));
        }
        Ok(WeightScheme::Geometric { scale, ratio })
    }

    /// `m_j` for `j >= 1`.
    pub fn weight(&self, j: usize) -> f64 {
        debug_assert!(j >= 1);
        match self {
            WeightScheme::ConstantOne => 1.0,
            WeightScheme::Explicit { values, tail } => values.get(j - 1).copied().unwrap_or(*tail),
            WeightScheme::Geometric { scale, ratio } => scale * ratio.powf((j - 1) as f64),
        }
    }

    /// `Σ m_j^q` over the block `{start, ..., start + len - 1}` (indices from 1).
    pub fn block_power_sum(&self, start: f64, len: f64, q: f64) -> f64 {
        debug_assert!(start >= 1.0, "indices start at 1");
        match self {
            WeightScheme::ConstantOne => len,
            WeightScheme::Explicit { values, tail } => {
                let listed = values.len() as f64;
                let mut sum = 0.0;
                let mut covered = 0.0;
                if start <= listed {
                    let lo = start as usize;
                    let hi = (start + len - 1.0).min(listed) as usize;
                    sum = values[lo - 1..hi].iter().map(|m| m.powf(q)).sum();
                    covered = (hi + 1 - lo) as f64;
                }
                sum + (len - covered) * tail.powf(q)
            }
            WeightScheme::Geometric { scale, ratio } => {
                // scale^q * x^(start-1) * (1 + x + ... + x^(len-1)) with x = ratio^q, in logs
                let ln_x = q * ratio.ln();
                let ln_series = if ln_x == 0.0 {
                    len.ln()
                } else if ln_x < 0.0 {
                    (-(len * ln_x).exp_m1()).ln() - (-ln_x.exp_m1()).ln()
                } else {
                    len * ln_x + (-(-len * ln_x).exp_m1()).ln() - ln_x.exp_m1().ln()
                };
                (q * scale.ln() + (start - 1.0) * ln_x + ln_series).exp()
            }
        }
    }

    /// The constant value the weights settle on, and the first index from
    /// which they hold it, when such a value exists.
    pub fn eventual_constant(&self) -> Option<(f64, usize)> {
        match self {
            WeightScheme::ConstantOne => Some((1.0, 1)),
            WeightScheme::Explicit { values, tail } => Some((*tail, values.len() + 1)),
            WeightScheme::Geometric { scale, ratio } if *ratio == 1.0 => Some((*scale, 1)),
            WeightScheme::Geometric { .. } => None,
        }
    }
}

/// The divisors `M_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormingScheme {
    /// `M_n = w_1 + ... + w_n`.
    Derived,
    /// `M_n = n^alpha`.
    Power { alpha: f64 },
    /// `M_k = n_k^(1/q)`.
    RootOfBoundary,
}

impl NormingScheme {
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(HardyError::InvalidNorming(format!(
                "power rule needs alpha > 0, got {alpha}"
            )));
        }
        Ok(NormingScheme::Power { alpha })
    }
}

/// Everything that determines the averaging operator and its constants.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragingConfig {
    pub partition: Partition,
    pub weights: WeightScheme,
    pub exponents: ExponentPair,
    pub norming: NormingScheme,
}

impl AveragingConfig {
    pub fn new(
        partition: Partition,
        weights: WeightScheme,
        exponents: ExponentPair,
        norming: NormingScheme,
    ) -> Self {
        Self {
            partition,
            weights,
            exponents,
            norming,
        }
    }

    pub fn p(&self) -> f64 {
        self.exponents.p()
    }

    pub fn q(&self) -> f64 {
        self.exponents.q()
    }
}
