//! Property-based invariants over randomized inputs.

use hiergp::data::{generate_synthetic, ground_truth_prior, split, SplitSpec};
use hiergp::gp::{cholesky_with_jitter, gram_matrix, matern_cov, JITTER_BASE};
use hiergp::pretrain::UnconstrainedParams;
use hiergp::{GpParams, KernelSpec, Matern, SubDataset};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn arb_smoothness() -> impl Strategy<Value = Matern> {
    prop_oneof![
        Just(Matern::Half),
        Just(Matern::ThreeHalves),
        Just(Matern::FiveHalves),
    ]
}

fn arb_params(dim: usize) -> impl Strategy<Value = GpParams> {
    (
        -3.0..3.0f64,
        proptest::collection::vec(0.05..3.0f64, dim),
        0.05..5.0f64,
        1e-6..0.5f64,
    )
        .prop_map(|(m, ls, sig, noise)| GpParams {
            constant_mean: m,
            lengthscales: ls,
            signal_variance: sig,
            noise_variance: noise,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_is_symmetric(
        smoothness in arb_smoothness(),
        params in arb_params(3),
        x in proptest::collection::vec(-2.0..2.0f64, 3),
        y in proptest::collection::vec(-2.0..2.0f64, 3),
    ) {
        let spec = KernelSpec::new(smoothness);
        let a = matern_cov(&x, &y, &params, spec).unwrap();
        let b = matern_cov(&y, &x, &params, spec).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
        // bounded by the signal variance
        prop_assert!(a <= params.signal_variance + 1e-15);
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn noisy_gram_factorizes_with_pivots_above_floor(
        smoothness in arb_smoothness(),
        params in arb_params(2),
        rows in proptest::collection::vec(proptest::collection::vec(0.0..1.0f64, 2), 2..12),
    ) {
        let spec = KernelSpec::new(smoothness);
        let xs = DMatrix::from_fn(rows.len(), 2, |i, j| rows[i][j]);
        let k = gram_matrix(&xs, &params, spec, true).unwrap();
        let (chol, jitter) = cholesky_with_jitter(&k, params.signal_variance).unwrap();
        // Schur complements of K + (noise + jitter) I stay above the shift,
        // so every pivot² clears (most of) the added diagonal.
        let floor = 0.5 * (params.noise_variance + JITTER_BASE * params.signal_variance);
        let min_pivot_sq = chol
            .l_dirty()
            .diagonal()
            .iter()
            .map(|d| d * d)
            .fold(f64::INFINITY, f64::min);
        prop_assert!(
            min_pivot_sq >= floor,
            "min pivot^2 {} below floor {} (jitter {})",
            min_pivot_sq,
            floor,
            jitter
        );
    }

    #[test]
    fn reparameterization_round_trips(params in arb_params(4)) {
        let raw = UnconstrainedParams::from_params(&params);
        let back = raw.to_params();
        prop_assert_eq!(back.constant_mean, params.constant_mean);
        for (a, b) in back.lengthscales.iter().zip(&params.lengthscales) {
            prop_assert!((a - b).abs() <= 1e-12 * b);
        }
        prop_assert!(
            (back.signal_variance - params.signal_variance).abs()
                <= 1e-12 * params.signal_variance
        );
        prop_assert!(
            (back.noise_variance - params.noise_variance).abs()
                <= 1e-12 * params.noise_variance
        );
    }

    #[test]
    fn posterior_with_no_observations_is_prior_predictive(
        params in arb_params(2),
        queries in proptest::collection::vec(proptest::collection::vec(0.0..1.0f64, 2), 1..6),
    ) {
        let q = DMatrix::from_fn(queries.len(), 2, |i, j| queries[i][j]);
        let post = hiergp::gp::posterior(&params, None, &q, KernelSpec::default(), false).unwrap();
        for i in 0..queries.len() {
            prop_assert_eq!(post.means[i], params.constant_mean);
            prop_assert_eq!(post.variances[i], params.signal_variance);
        }
    }

    #[test]
    fn splits_partition_the_units(
        n_datasets in 2usize..7,
        subs in 2usize..6,
        frac in 0.15..0.85f64,
        seed in 0u64..500,
    ) {
        let s = generate_synthetic(
            &ground_truth_prior(),
            n_datasets,
            subs,
            3,
            (1, 2),
            seed,
            KernelSpec::default(),
        )
        .unwrap();

        let (train, test) = split(&s, &SplitSpec::setup_a(frac)).unwrap();
        prop_assert_eq!(train.n_datasets() + test.n_datasets(), n_datasets);
        for id in s.datasets.keys() {
            prop_assert!(train.datasets.contains_key(id) ^ test.datasets.contains_key(id));
        }

        let (train_b, test_b) = split(&s, &SplitSpec::setup_b(frac)).unwrap();
        for (id, ds) in &s.datasets {
            let t = &train_b.datasets[id].sub_datasets;
            let e = &test_b.datasets[id].sub_datasets;
            prop_assert_eq!(t.len() + e.len(), ds.sub_datasets.len());
            for sub in ds.sub_datasets.keys() {
                prop_assert!(t.contains_key(sub) ^ e.contains_key(sub));
            }
        }
    }

    #[test]
    fn nll_is_additive_over_sub_datasets(
        params in arb_params(1),
        a_rows in proptest::collection::vec(0.0..1.0f64, 1..6),
        b_rows in proptest::collection::vec(0.0..1.0f64, 1..6),
    ) {
        let spec = KernelSpec::default();
        let mk = |vals: &[f64]| {
            let rows: Vec<Vec<f64>> = vals.iter().map(|&v| vec![v]).collect();
            let ys: Vec<f64> = vals.iter().map(|&v| (7.0 * v).sin()).collect();
            SubDataset::from_rows(&rows, &ys).unwrap()
        };
        let a = mk(&a_rows);
        let b = mk(&b_rows);
        let lhs = hiergp::gp::dataset_nll(&params, &[a.clone(), b.clone()], spec).unwrap();
        let rhs = hiergp::gp::sub_dataset_nll(&params, &a, spec).unwrap()
            + hiergp::gp::sub_dataset_nll(&params, &b, spec).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0));
    }
}
