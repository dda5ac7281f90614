//! The averaging operator `a ↦ (M_n^{-1} Σ_{j ∈ 𝐍_n} m_j a_j)_n`, ℓ^p norms,
//! inequality checks, and a matrix-free estimate of the truncated operator
//! norm at `p = 2`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constants::{blocks, BoundReport};
use crate::error::{HardyError, Result};
use crate::partitions::AveragingConfig;

/// Relative slack allowed before a check counts as a violation.
pub const HOLDS_REL_TOL: f64 = 1e-12;

/// Largest truncated operator we are willing to materialize.
const MAX_ENTRIES: f64 = (1u64 << 28) as f64;

/// Finite prefix `(a_1, ..., a_N)` of a complex sequence.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TruncatedSequence {
    values: Vec<Complex64>,
}

impl TruncatedSequence {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values
            .iter()
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(HardyError::NonFiniteSequence);
        }
        Ok(Self { values })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            values: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }
}

/// Output of [`apply_operator`].
#[derive(Debug, Clone, PartialEq)]
pub struct Averages {
    /// `(b_1, ..., b_K*)` for the `K*` blocks fully covered by the input.
    pub values: TruncatedSequence,
    /// Set when the input does not even cover `N_1`.
    pub short_input: bool,
}

/// One instance of `‖T a‖_p <= C ‖a‖_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub lhs: f64,
    pub rhs_norm: f64,
    pub bound_constant: f64,
    pub slack: f64,
    pub holds: bool,
}

impl VerificationReport {
    pub fn new(lhs: f64, rhs_norm: f64, bound_constant: f64) -> Self {
        let scale = bound_constant * rhs_norm;
        let slack = scale - lhs;
        Self {
            lhs,
            rhs_norm,
            bound_constant,
            slack,
            holds: slack >= -HOLDS_REL_TOL * scale,
        }
    }
}

/// `b_k = M_k^{-1} Σ_{j <= n_k} m_j a_j` for every block covered by `a`,
/// in a single prefix-sum pass.
pub fn apply_operator(a: &TruncatedSequence, config: &AveragingConfig) -> Result<Averages> {
    let covered = config.partition.complete_blocks_within(a.len());
    if covered == 0 {
        return Ok(Averages {
            values: TruncatedSequence::default(),
            short_input: true,
        });
    }
    let boundaries = config.partition.boundaries_upto(covered)?;
    let norming = norming_values(config, covered)?;
    let mut out = Vec::with_capacity(covered);
    let mut prefix = Complex64::new(0.0, 0.0);
    let mut j = 0usize;
    for (k, &n_k) in boundaries.iter().enumerate() {
        while j < n_k as usize {
            prefix += a.values[j] * config.weights.weight(j + 1);
            j += 1;
        }
        out.push(prefix / norming[k]);
    }
    Ok(Averages {
        values: TruncatedSequence { values: out },
        short_input: false,
    })
}

/// `M_1, ..., M_k` in one pass over the blocks.
fn norming_values(config: &AveragingConfig, k: usize) -> Result<Vec<f64>> {
    let values: Vec<f64> = blocks(config).take(k).map(|b| b.norming).collect();
    if values.len() < k {
        return Err(HardyError::OutOfRange {
            index: k,
            available: config.partition.len(),
        });
    }
    Ok(values)
}

/// `(Σ |a_j|^p)^(1/p)`, with the largest modulus factored out first.
pub fn lp_norm(a: &TruncatedSequence, p: f64) -> f64 {
    assert!(p >= 1.0, "lp_norm needs p >= 1, got {p}");
    let scale = a.values.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let sum: f64 = a.values.iter().map(|z| (z.norm() / scale).powf(p)).sum();
    scale * sum.powf(1.0 / p)
}

/// Checks `‖T a‖_p <= C ‖a‖_p` for the zero-extension of `a`.
///
/// Only blocks fully covered by `a` enter the left side. The dropped blocks
/// would only add to it, so the check is a valid instance of the infinite
/// inequality.
pub fn verify_main_inequality(
    a: &TruncatedSequence,
    config: &AveragingConfig,
    constant: &BoundReport,
) -> Result<VerificationReport> {
    if !constant.converged || !constant.constant.is_finite() {
        return Err(HardyError::DivergedConstant);
    }
    let p = config.p();
    let averages = apply_operator(a, config)?;
    let lhs = lp_norm(&averages.values, p);
    let rhs_norm = lp_norm(a, p);
    Ok(VerificationReport::new(lhs, rhs_norm, constant.constant))
}

/// The finite section `T_K` (rows `k <= K`, columns `j <= n_K`,
/// `T[k][j] = m_j / M_k` for `j <= n_k`) as a real linear map.
#[derive(Debug, Clone)]
pub struct TruncatedOperator {
    weights: Vec<f64>,
    boundaries: Vec<usize>,
    norming: Vec<f64>,
}

impl TruncatedOperator {
    pub fn new(config: &AveragingConfig, blocks: usize) -> Result<Self> {
        if blocks == 0 {
            return Err(HardyError::InvalidPartition(
                "truncation needs at least one block".into(),
            ));
        }
        let n = config.partition.boundary(blocks)?;
        if n > MAX_ENTRIES {
            return Err(HardyError::TooLarge(n));
        }
        let boundaries: Vec<usize> = config
            .partition
            .boundaries_upto(blocks)?
            .into_iter()
            .map(|b| b as usize)
            .collect();
        let n = *boundaries.last().expect("blocks >= 1");
        let weights = (1..=n).map(|j| config.weights.weight(j)).collect();
        let norming = norming_values(config, blocks)?;
        Ok(Self {
            weights,
            boundaries,
            norming,
        })
    }

    /// Number of rows `K`.
    pub fn rows(&self) -> usize {
        self.boundaries.len()
    }

    /// Number of columns `n_K`.
    pub fn cols(&self) -> usize {
        self.weights.len()
    }

    /// `T_K x` by weighted prefix sums.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols());
        let mut out = Vec::with_capacity(self.rows());
        let mut prefix = 0.0;
        let mut j = 0;
        for (k, &n_k) in self.boundaries.iter().enumerate() {
            while j < n_k {
                prefix += self.weights[j] * x[j];
                j += 1;
            }
            out.push(prefix / self.norming[k]);
        }
        out
    }

    /// `T_K^* y`: column `j` in block `i` gets `m_j Σ_{k >= i} y_k / M_k`.
    pub fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows());
        let mut out = vec![0.0; self.cols()];
        let mut suffix = 0.0;
        for k in (0..self.rows()).rev() {
            suffix += y[k] / self.norming[k];
            let start = if k == 0 { 0 } else { self.boundaries[k - 1] };
            let end = self.boundaries[k];
            for (o, w) in out[start..end].iter_mut().zip(&self.weights[start..end]) {
                *o = w * suffix;
            }
        }
        out
    }

    /// Largest singular value by power iteration on `T^* T`.
    ///
    /// Stops once the Rayleigh quotient changes by at most `tol` relative.
    /// Tolerances under [`RAYLEIGH_FLOOR`] are raised to it.
    pub fn norm_estimate(&self, tol: f64, max_iters: usize, seed: u64) -> NormEstimate {
        let tol = tol.max(RAYLEIGH_FLOOR);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Positive start: the top singular vector of a nonnegative matrix is nonnegative.
        let mut x: Vec<f64> = (0..self.cols())
            .map(|_| rng.random_range(0.5..1.5))
            .collect();
        if !normalize(&mut x) {
            return NormEstimate::zero();
        }
        let mut lambda = 0.0;
        for iter in 1..=max_iters {
            let y = self.forward(&x);
            let rayleigh: f64 = y.iter().map(|v| v * v).sum();
            if rayleigh == 0.0 {
                return NormEstimate::zero();
            }
            let mut next = self.adjoint(&y);
            let change = (rayleigh - lambda).abs();
            lambda = rayleigh;
            if iter > 1 && change <= tol * rayleigh {
                return NormEstimate {
                    value: lambda.sqrt(),
                    iterations: iter,
                    converged: true,
                };
            }
            if !normalize(&mut next) {
                return NormEstimate::zero();
            }
            x = next;
        }
        NormEstimate {
            value: lambda.sqrt(),
            iterations: max_iters,
            converged: false,
        }
    }
}

fn normalize(x: &mut [f64]) -> bool {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return false;
    }
    x.iter_mut().for_each(|v| *v /= norm);
    true
}

/// Result of the power iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl NormEstimate {
    fn zero() -> Self {
        Self {
            value: 0.0,
            iterations: 0,
            converged: true,
        }
    }
}

/// Below this the Rayleigh quotient only jitters in its last bits.
pub const RAYLEIGH_FLOOR: f64 = 32.0 * f64::EPSILON;

/// Seed for the power-iteration start vector unless overridden.
pub const DEFAULT_SEED: u64 = 42;

/// `σ_max(T_K)` at `p = 2`, estimated matrix-free.
pub fn truncated_operator_norm(
    config: &AveragingConfig,
    blocks: usize,
    tol: f64,
    max_iters: usize,
) -> Result<NormEstimate> {
    truncated_operator_norm_seeded(config, blocks, tol, max_iters, DEFAULT_SEED)
}

pub fn truncated_operator_norm_seeded(
    config: &AveragingConfig,
    blocks: usize,
    tol: f64,
    max_iters: usize,
    seed: u64,
) -> Result<NormEstimate> {
    if config.p() != 2.0 {
        return Err(HardyError::UnsupportedExponent(config.p()));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(HardyError::InvalidTolerance(tol));
    }
    Ok(TruncatedOperator::new(config, blocks)?.norm_estimate(tol, max_iters, seed))
}
