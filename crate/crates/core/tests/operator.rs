mod common;

use approx::assert_relative_eq;
use common::{config, covered_len, dense_matrix, dense_norm, random_complex, suite_configs};
use hardy_core::operator::truncated_operator_norm_seeded;
use hardy_core::{
    apply_operator, generalized_rho, geometric_partition, lp_norm, truncated_operator_norm,
    verify_main_inequality, AveragingConfig, ExtensionRule, NormingScheme, Partition,
    TruncatedOperator, TruncatedSequence, WeightScheme,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn root_b4() -> AveragingConfig {
    config(
        geometric_partition(4, 8).unwrap(),
        WeightScheme::ConstantOne,
        2.0,
        NormingScheme::RootOfBoundary,
    )
}

#[test]
fn apply_operator_matches_dense_matrix() {
    for (name, cfg) in suite_configs(2.0) {
        let blocks = cfg.partition.len().min(5);
        let dense = dense_matrix(&cfg, blocks);
        let n = dense.ncols();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_complex(&mut rng, n);
        let got = apply_operator(&a, &cfg).unwrap().values;
        let re = nalgebra::DVector::from_iterator(n, a.values().iter().map(|z| z.re));
        let im = nalgebra::DVector::from_iterator(n, a.values().iter().map(|z| z.im));
        let (want_re, want_im) = (&dense * re, &dense * im);
        assert_eq!(got.len(), blocks, "{name}");
        for k in 0..blocks {
            let z = got.values()[k];
            assert!(
                (z.re - want_re[k]).abs() <= 1e-12 * (1.0 + want_re[k].abs()),
                "{name} k={k}"
            );
            assert!(
                (z.im - want_im[k]).abs() <= 1e-12 * (1.0 + want_im[k].abs()),
                "{name} k={k}"
            );
        }
    }
}

#[test]
fn power_iteration_matches_dense_svd() {
    let mut cases = vec![("root b=4", root_b4())];
    cases.extend(suite_configs(2.0));
    for (name, cfg) in cases {
        for blocks in 1..=cfg.partition.len() {
            if cfg.partition.boundary(blocks).unwrap() > 512.0 {
                break;
            }
            let est = truncated_operator_norm(&cfg, blocks, 1e-14, 200_000).unwrap();
            assert!(est.converged, "{name} K={blocks}");
            assert_relative_eq!(est.value, dense_norm(&cfg, blocks), max_relative = 1e-8);
        }
    }
}

#[test]
fn norms_are_monotone_in_truncation() {
    for (name, cfg) in suite_configs(2.0) {
        let mut previous = 0.0;
        for blocks in 1..=cfg.partition.len().min(8) {
            let est = truncated_operator_norm(&cfg, blocks, 1e-14, 200_000).unwrap();
            assert!(est.value >= previous * (1.0 - 1e-10), "{name} K={blocks}");
            previous = est.value;
        }
    }
}

#[test]
fn norm_estimate_is_seed_independent() {
    let cfg = root_b4();
    let a = truncated_operator_norm_seeded(&cfg, 5, 1e-14, 200_000, 1).unwrap();
    let b = truncated_operator_norm_seeded(&cfg, 5, 1e-14, 200_000, 99).unwrap();
    assert_relative_eq!(a.value, b.value, max_relative = 1e-10);
}

#[test]
fn norm_rejects_other_exponents() {
    let cfg = config(
        geometric_partition(4, 3).unwrap(),
        WeightScheme::ConstantOne,
        3.0,
        NormingScheme::Derived,
    );
    assert!(truncated_operator_norm(&cfg, 2, 1e-10, 100).is_err());
}

#[test]
fn inequality_holds_on_random_samples() {
    for p in [1.5, 2.0, 3.0] {
        for (name, cfg) in suite_configs(p) {
            let bound = generalized_rho(&cfg, 1e-12).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            for _ in 0..50 {
                let a = random_complex(&mut rng, covered_len(&cfg));
                let report = verify_main_inequality(&a, &cfg, &bound).unwrap();
                assert!(
                    report.holds && report.slack > 0.0,
                    "{name} p={p}: {report:?}"
                );
            }
        }
    }
}

#[test]
fn inequality_is_strict_for_root_norming() {
    let cfg = root_b4();
    let bound = generalized_rho(&cfg, 1e-12).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for len in [1usize, 4, 64, 4096] {
        let a = random_complex(&mut rng, len);
        let report = verify_main_inequality(&a, &cfg, &bound).unwrap();
        assert!(report.slack > 0.0, "{report:?}");
    }
}

fn arb_config() -> impl Strategy<Value = AveragingConfig> {
    (
        prop::collection::vec(1u64..5, 1..7),
        2u64..4,
        prop_oneof![
            Just(NormingScheme::Derived),
            Just(NormingScheme::RootOfBoundary),
            Just(NormingScheme::Power { alpha: 2.0 })
        ],
        prop_oneof![
            Just(WeightScheme::ConstantOne),
            (0.5f64..2.0, 0.9f64..1.1).prop_map(|(s, r)| WeightScheme::geometric(s, r).unwrap()),
        ],
    )
        .prop_map(|(lengths, ratio, norming, weights)| {
            let partition =
                Partition::new(lengths, Some(ExtensionRule::Geometric { ratio })).unwrap();
            config(partition, weights, 2.0, norming)
        })
}

fn arb_vec(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn operator_is_linear(
        cfg in arb_config(),
        seed in any::<u64>(),
        alpha in -3.0f64..3.0,
        beta in -3.0f64..3.0,
    ) {
        let n = covered_len(&cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_complex(&mut rng, n);
        let y = random_complex(&mut rng, n);
        let (ca, cb) = (Complex64::new(alpha, 0.5), Complex64::new(beta, -1.0));
        let combo: Vec<Complex64> = x.values().iter().zip(y.values()).map(|(u, v)| ca * u + cb * v).collect();
        let lhs = apply_operator(&TruncatedSequence::new(combo).unwrap(), &cfg).unwrap().values;
        let tx = apply_operator(&x, &cfg).unwrap().values;
        let ty = apply_operator(&y, &cfg).unwrap().values;
        for k in 0..lhs.len() {
            let want = ca * tx.values()[k] + cb * ty.values()[k];
            let scale = 1.0 + (ca * tx.values()[k]).norm() + (cb * ty.values()[k]).norm();
            prop_assert!((lhs.values()[k] - want).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn adjoint_is_consistent(cfg in arb_config(), seed in any::<u64>()) {
        let blocks = cfg.partition.len();
        let op = TruncatedOperator::new(&cfg, blocks).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<f64> = random_complex(&mut rng, op.cols()).values().iter().map(|z| z.re).collect();
        let x: Vec<f64> = random_complex(&mut rng, op.rows()).values().iter().map(|z| z.re).collect();
        let ta = op.forward(&a);
        let tx = op.adjoint(&x);
        let left: f64 = ta.iter().zip(&x).map(|(u, v)| u * v).sum();
        let right: f64 = a.iter().zip(&tx).map(|(u, v)| u * v).sum();
        let scale: f64 = ta.iter().zip(&x).map(|(u, v)| (u * v).abs()).sum::<f64>() + 1e-300;
        prop_assert!((left - right).abs() <= 1e-10 * scale, "{left} vs {right}");
    }

    #[test]
    fn lp_norm_is_homogeneous(values in arb_vec(20), c in -5.0f64..5.0, p in 1.0f64..6.0) {
        let a = TruncatedSequence::from_real(&values).unwrap();
        let scaled: Vec<f64> = values.iter().map(|v| c * v).collect();
        let scaled = TruncatedSequence::from_real(&scaled).unwrap();
        let want = c.abs() * lp_norm(&a, p);
        prop_assert!((lp_norm(&scaled, p) - want).abs() <= 1e-12 * (1.0 + want));
    }
}

#[test]
fn undersized_constant_is_reported_as_violation() {
    let cfg = root_b4();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let a = random_complex(&mut rng, 64);
    let report = verify_main_inequality(&a, &cfg, &hardy_core::BoundReport::exact(0.1)).unwrap();
    assert!(!report.holds && report.slack < 0.0);
}
