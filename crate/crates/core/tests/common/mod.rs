#![allow(dead_code)]

use hardy_core::{
    geometric_partition, lacunary_partition, singleton_partition, AveragingConfig, ExponentPair,
    ExtensionRule, NormingScheme, Partition, TruncatedSequence, WeightScheme,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const ZETA_3: f64 = 1.202_056_903_159_594_2;

pub fn config(
    partition: Partition,
    weights: WeightScheme,
    p: f64,
    norming: NormingScheme,
) -> AveragingConfig {
    AveragingConfig::new(
        partition,
        weights,
        ExponentPair::from_p(p).unwrap(),
        norming,
    )
}

pub fn lacunary_with_ratio(boundaries: &[u64], ratio: u64) -> Partition {
    let (partition, _) = lacunary_partition(boundaries).unwrap();
    partition
        .with_extension(Some(ExtensionRule::Geometric { ratio }))
        .unwrap()
}

/// Weights in `[0.5, 2)` for the first 256 indices, 1 afterwards.
pub fn explicit_weights() -> WeightScheme {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let values = (0..256).map(|_| rng.random_range(0.5..2.0)).collect();
    WeightScheme::explicit(values, 1.0).unwrap()
}

/// The five families of the main property suite at exponent `p`.
pub fn suite_configs(p: f64) -> Vec<(&'static str, AveragingConfig)> {
    vec![
        (
            "geometric b=2",
            config(
                geometric_partition(2, 8).unwrap(),
                WeightScheme::ConstantOne,
                p,
                NormingScheme::Derived,
            ),
        ),
        (
            "geometric b=4",
            config(
                geometric_partition(4, 5).unwrap(),
                WeightScheme::ConstantOne,
                p,
                NormingScheme::Derived,
            ),
        ),
        (
            "lacunary 3,9,27,81",
            config(
                lacunary_with_ratio(&[3, 9, 27, 81], 3),
                WeightScheme::ConstantOne,
                p,
                NormingScheme::Derived,
            ),
        ),
        (
            "singleton n^2",
            config(
                singleton_partition(64).unwrap(),
                WeightScheme::ConstantOne,
                p,
                NormingScheme::power(2.0).unwrap(),
            ),
        ),
        (
            "explicit weights",
            config(
                geometric_partition(2, 8).unwrap(),
                explicit_weights(),
                p,
                NormingScheme::Derived,
            ),
        ),
    ]
}

/// Length of the finite partition stored in `config`.
pub fn covered_len(config: &AveragingConfig) -> usize {
    *config.partition.boundaries().last().unwrap() as usize
}

/// Complex sequence with i.i.d. `N(0, 1/2)` real and imaginary parts.
pub fn random_complex(rng: &mut ChaCha8Rng, len: usize) -> TruncatedSequence {
    let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).unwrap();
    let values = (0..len)
        .map(|_| Complex64::new(normal.sample(rng), normal.sample(rng)))
        .collect();
    TruncatedSequence::new(values).unwrap()
}

/// `T_K` built entry by entry from the definitions, with the norming
/// recomputed here rather than taken from the library.
pub fn dense_matrix(config: &AveragingConfig, blocks: usize) -> DMatrix<f64> {
    let bounds = config.partition.boundaries_upto(blocks).unwrap();
    let n = *bounds.last().unwrap() as usize;
    let q = config.q();
    let weight = |j: usize| config.weights.weight(j);
    let mut norming = Vec::with_capacity(blocks);
    let mut cumulative = 0.0;
    let mut start = 0usize;
    for (k, &end) in bounds.iter().enumerate() {
        let end = end as usize;
        let w: f64 = (start + 1..=end)
            .map(|j| weight(j).powf(q))
            .sum::<f64>()
            .powf(1.0 / q);
        cumulative += w;
        norming.push(match config.norming {
            NormingScheme::Derived => cumulative,
            NormingScheme::Power { alpha } => ((k + 1) as f64).powf(alpha),
            NormingScheme::RootOfBoundary => (end as f64).powf(1.0 / q),
        });
        start = end;
    }
    DMatrix::from_fn(blocks, n, |k, j| {
        if j < bounds[k] as usize {
            weight(j + 1) / norming[k]
        } else {
            0.0
        }
    })
}

pub fn dense_norm(config: &AveragingConfig, blocks: usize) -> f64 {
    dense_matrix(config, blocks).singular_values().max()
}

/// `Σ_k |b^{-k/2} Σ_{j <= b^k} a_j|^2` for `a_j = r^{-i}` on `N_i`, summed
/// block by block (the sequence is constant on blocks). Tracks
/// `x_k = b^{-k/2} Σ_{j <= b^k} a_j` so nothing overflows for large `k`.
pub fn extremal_lhs_brute(b: f64, r: f64, blocks: i32) -> f64 {
    let s = b.sqrt();
    let mut x = 0.0;
    let mut total = 0.0;
    for k in 1..=blocks {
        // |N_k| r^{-k} b^{-k/2}
        let fresh = if k == 1 {
            s / r
        } else {
            (1.0 - 1.0 / b) * (s / r).powi(k)
        };
        x = x / s + fresh;
        total += x * x;
    }
    total
}

pub fn extremal_l2_brute(b: f64, r: f64, blocks: i32) -> f64 {
    let decay = b / (r * r);
    (1..=blocks)
        .map(|k| {
            if k == 1 {
                decay
            } else {
                (1.0 - 1.0 / b) * decay.powi(k)
            }
        })
        .sum()
}
