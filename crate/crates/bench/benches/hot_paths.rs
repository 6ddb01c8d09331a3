use criterion::{criterion_group, criterion_main, Criterion};
use hiergp::bo::{hierarchical_acquisition, AcquisitionSpec, BoConfig};
use hiergp::data::ground_truth_prior;
use hiergp::gp::{dataset_nll_grad, posterior, sample_function_values, sub_dataset_nll};
use hiergp::prior::{fit_gamma_mle, GammaParams, PriorSource};
use hiergp::rng::rng_from_seed;
use hiergp::{GpParams, KernelSpec, SubDataset};
use nalgebra::DMatrix;
use rand::Rng;
use std::hint::black_box;

fn make_sub(seed: u64, n: usize, dim: usize, params: &GpParams) -> SubDataset {
    let mut rng = rng_from_seed(seed);
    let xs = DMatrix::from_fn(n, dim, |_, _| rng.random_range(0.0..1.0));
    let ys = sample_function_values(params, &xs, KernelSpec::default(), &mut rng, true).unwrap();
    SubDataset::new(xs, ys).unwrap()
}

fn bench_nll(c: &mut Criterion) {
    let params = GpParams::isotropic(0.5, 0.3, 3, 1.0, 1e-3).unwrap();
    let sd = make_sub(1, 100, 3, &params);
    c.bench_function("sub_dataset_nll_100x3", |b| {
        b.iter(|| sub_dataset_nll(black_box(&params), black_box(&sd), KernelSpec::default()))
    });
    c.bench_function("dataset_nll_grad_100x3", |b| {
        b.iter(|| {
            dataset_nll_grad(
                black_box(&params),
                black_box(std::slice::from_ref(&sd)),
                KernelSpec::default(),
            )
        })
    });
}

fn bench_posterior(c: &mut Criterion) {
    let params = GpParams::isotropic(0.5, 0.3, 3, 1.0, 1e-3).unwrap();
    let observed = make_sub(2, 50, 3, &params);
    let mut rng = rng_from_seed(3);
    let queries = DMatrix::from_fn(250, 3, |_, _| rng.random_range(0.0..1.0));
    c.bench_function("posterior_50obs_250q", |b| {
        b.iter(|| {
            posterior(
                black_box(&params),
                Some(black_box(&observed)),
                black_box(&queries),
                KernelSpec::default(),
                false,
            )
        })
    });
}

fn bench_acquisition(c: &mut Criterion) {
    let params = GpParams::isotropic(0.5, 0.3, 2, 1.0, 1e-3).unwrap();
    let observed = make_sub(4, 20, 2, &params);
    let mut rng = rng_from_seed(5);
    let candidates = DMatrix::from_fn(200, 2, |_, _| rng.random_range(0.0..1.0));
    let prior = PriorSource::Hyper(ground_truth_prior());
    let cfg = BoConfig::new(1, 0, 100, 0);
    c.bench_function("hierarchical_acquisition_r100", |b| {
        b.iter(|| {
            let mut acq_rng = rng_from_seed(6);
            hierarchical_acquisition(
                &AcquisitionSpec::default_pi(),
                black_box(&prior),
                Some(black_box(&observed)),
                black_box(&candidates),
                &cfg,
                &mut acq_rng,
                KernelSpec::default(),
            )
        })
    });
}

fn bench_gamma_mle(c: &mut Criterion) {
    let g = GammaParams::new(10.0, 30.0).unwrap();
    let mut rng = rng_from_seed(7);
    let draws: Vec<f64> = (0..10_000).map(|_| g.sample(&mut rng)).collect();
    c.bench_function("fit_gamma_mle_10k", |b| {
        b.iter(|| fit_gamma_mle(black_box(&draws)))
    });
}

criterion_group!(
    benches,
    bench_nll,
    bench_posterior,
    bench_acquisition,
    bench_gamma_mle
);
criterion_main!(benches);
