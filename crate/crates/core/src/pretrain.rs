//! Two-step pre-training: per-search-space GP parameter MLE by gradient
//! optimization in an unconstrained (softplus) parameterization, then the
//! hyper-prior MLE over the collected fits. Also hosts the empirical
//! asymptotics sweep drivers.

use crate::data::{subsample_sub_dataset, SuperDataset};
use crate::error::{Error, Result};
use crate::gp::{
    dataset_nll, dataset_nll_grad, sample_function_values, GpParams, KernelSpec, SubDataset,
};
use crate::math::{sigmoid, softplus, softplus_inv};
use crate::opt::{adam, lbfgs, AdamConfig, LbfgsConfig};
use crate::prior::{fit_hyper_prior, hierarchical_nll, DiscretePrior, HyperPrior, PriorSource, UniformBoxPrior};
use crate::rng::{derive_seed, derive_seed_tagged, rng_from_seed};
use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Lbfgs,
    Adam,
}

/// Knobs for one per-space GP fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub optimizer: OptimizerKind,
    pub max_iters: usize,
    /// Adam step size (ignored by L-BFGS).
    pub learning_rate: f64,
    /// Adam only: per-iteration subsample of each sub-dataset, fresh each step.
    pub subsample_per_iter: Option<usize>,
    /// Random initializations tried in addition to the fixed one.
    pub restarts: usize,
    pub seed: u64,
}

impl FitConfig {
    pub fn lbfgs_default() -> Self {
        FitConfig {
            optimizer: OptimizerKind::Lbfgs,
            max_iters: 500,
            learning_rate: 0.001,
            subsample_per_iter: None,
            restarts: 5,
            seed: 0,
        }
    }

    pub fn adam_default() -> Self {
        FitConfig {
            optimizer: OptimizerKind::Adam,
            max_iters: 10_000,
            learning_rate: 0.001,
            subsample_per_iter: Some(50),
            restarts: 5,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::invalid_argument("max_iters must be >= 1"));
        }
        if self.optimizer == OptimizerKind::Adam && !(self.learning_rate > 0.0) {
            return Err(Error::invalid_argument(
                "learning_rate must be positive for Adam",
            ));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        FitConfig { seed, ..self.clone() }
    }
}

/// Softplus image of [`GpParams`]: the mean maps through the identity, every
/// positive parameter through softplus. Flat layout:
/// [mean, lengthscales.., signal, noise].
#[derive(Debug, Clone, PartialEq)]
pub struct UnconstrainedParams {
    pub raw_mean: f64,
    pub raw_lengthscales: Vec<f64>,
    pub raw_signal_variance: f64,
    pub raw_noise_variance: f64,
}

impl UnconstrainedParams {
    pub fn from_params(p: &GpParams) -> Self {
        UnconstrainedParams {
            raw_mean: p.constant_mean,
            raw_lengthscales: p.lengthscales.iter().map(|&l| softplus_inv(l)).collect(),
            raw_signal_variance: softplus_inv(p.signal_variance),
            raw_noise_variance: softplus_inv(p.noise_variance),
        }
    }

    pub fn to_params(&self) -> GpParams {
        GpParams {
            constant_mean: self.raw_mean,
            lengthscales: self.raw_lengthscales.iter().map(|&r| softplus(r)).collect(),
            signal_variance: softplus(self.raw_signal_variance),
            noise_variance: softplus(self.raw_noise_variance),
        }
    }

    pub fn dim(&self) -> usize {
        self.raw_lengthscales.len()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim() + 3);
        v.push(self.raw_mean);
        v.extend_from_slice(&self.raw_lengthscales);
        v.push(self.raw_signal_variance);
        v.push(self.raw_noise_variance);
        v
    }

    pub fn from_flat(v: &[f64]) -> Self {
        let d = v.len() - 3;
        UnconstrainedParams {
            raw_mean: v[0],
            raw_lengthscales: v[1..1 + d].to_vec(),
            raw_signal_variance: v[1 + d],
            raw_noise_variance: v[2 + d],
        }
    }
}

/// Full-data NLL and its gradient in the unconstrained space (chain rule
/// through softplus). This is the exact objective the optimizers see.
pub fn nll_grad_unconstrained(
    raw: &UnconstrainedParams,
    sds: &[SubDataset],
    spec: KernelSpec,
) -> Result<(f64, Vec<f64>)> {
    let params = raw.to_params();
    params.validate()?;
    let (value, grad) = dataset_nll_grad(&params, sds, spec)?;
    let d = raw.dim();
    let mut g = Vec::with_capacity(d + 3);
    g.push(grad.constant_mean);
    for (gl, &r) in grad.lengthscales.iter().zip(&raw.raw_lengthscales) {
        g.push(gl * sigmoid(r));
    }
    g.push(grad.signal_variance * sigmoid(raw.raw_signal_variance));
    g.push(grad.noise_variance * sigmoid(raw.raw_noise_variance));
    Ok((value, g))
}

/// The fixed optimizer initialization (always tried first).
fn fixed_init(dim: usize) -> GpParams {
    GpParams {
        constant_mean: 0.0,
        lengthscales: vec![0.5; dim],
        signal_variance: 1.0,
        noise_variance: 1e-3,
    }
}

/// Fit GP parameters to a list of sub-datasets by minimizing the summed NLL.
///
/// Tries the fixed initialization plus `cfg.restarts` random ones drawn from
/// the non-informative ranges and keeps the run with the lowest full-data
/// NLL. L-BFGS sees the full data every iteration; Adam subsamples each
/// sub-dataset afresh per step and the winner is still scored on full data.
pub fn fit_gp_mle(
    sds: &[SubDataset],
    cfg: &FitConfig,
    spec: KernelSpec,
) -> Result<(GpParams, f64)> {
    cfg.validate()?;
    if sds.is_empty() {
        return Err(Error::invalid_argument("cannot fit an empty dataset"));
    }
    let dim = crate::gp::check_shared_dim(sds)?.unwrap();

    let box_prior = UniformBoxPrior::non_informative();
    let mut inits = vec![fixed_init(dim)];
    for i in 0..cfg.restarts {
        let mut rng = rng_from_seed(derive_seed(cfg.seed, "init", i as u64));
        inits.push(box_prior.sample(dim, &mut rng));
    }

    let mut best: Option<(GpParams, f64)> = None;
    let mut failures = Vec::new();
    for (restart, init) in inits.iter().enumerate() {
        let raw0 = UnconstrainedParams::from_params(init).to_flat();
        let outcome: Result<Vec<f64>> = match cfg.optimizer {
            OptimizerKind::Lbfgs => {
                let objective = |x: &[f64]| {
                    let raw = UnconstrainedParams::from_flat(x);
                    match nll_grad_unconstrained(&raw, sds, spec) {
                        Ok((v, g)) if v.is_finite() && g.iter().all(|gi| gi.is_finite()) => (v, g),
                        _ => (f64::INFINITY, vec![0.0; x.len()]),
                    }
                };
                let lcfg = LbfgsConfig {
                    max_iters: cfg.max_iters,
                    ..LbfgsConfig::default()
                };
                lbfgs(&raw0, objective, &lcfg).map(|o| o.x)
            }
            OptimizerKind::Adam => {
                let acfg = AdamConfig::new(cfg.max_iters, cfg.learning_rate);
                let iter_base = derive_seed(cfg.seed, "adam-restart", restart as u64);
                let objective = |t: usize, x: &[f64]| {
                    let raw = UnconstrainedParams::from_flat(x);
                    let view: Result<Vec<SubDataset>> = match cfg.subsample_per_iter {
                        Some(n) => sds
                            .iter()
                            .enumerate()
                            .map(|(k, sd)| {
                                let s = derive_seed(
                                    derive_seed(iter_base, "iter", t as u64),
                                    "sub",
                                    k as u64,
                                );
                                subsample_sub_dataset(sd, n, s)
                            })
                            .collect(),
                        None => Ok(sds.to_vec()),
                    };
                    match view.and_then(|v| nll_grad_unconstrained(&raw, &v, spec)) {
                        Ok((v, g)) => (v, g),
                        Err(_) => (f64::NAN, vec![f64::NAN; x.len()]),
                    }
                };
                adam(&raw0, objective, &acfg)
            }
        };

        match outcome {
            Ok(x) => {
                let raw = UnconstrainedParams::from_flat(&x);
                let params = raw.to_params();
                match params
                    .validate()
                    .and_then(|_| dataset_nll(&params, sds, spec))
                {
                    Ok(full_nll) if full_nll.is_finite() => {
                        if best.as_ref().map(|(_, b)| full_nll < *b).unwrap_or(true) {
                            best = Some((params, full_nll));
                        }
                    }
                    Ok(v) => failures.push(format!("restart {restart}: non-finite NLL {v}")),
                    Err(e) => failures.push(format!("restart {restart}: {e}")),
                }
            }
            Err(e) => failures.push(format!("restart {restart}: {e}")),
        }
    }

    best.ok_or_else(|| Error::AllRestartsFailed(failures.join("; ")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceFit {
    pub space_id: String,
    pub dim: usize,
    pub params: GpParams,
    pub nll: f64,
}

/// Output of the two-step pre-training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PretrainResult {
    pub per_space_fits: Vec<SpaceFit>,
    pub hyper_prior: HyperPrior,
    pub discrete_prior: DiscretePrior,
    /// Runtime metadata; excluded from determinism comparisons.
    pub wallclock_secs: f64,
}

impl PretrainResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }
}

/// Step 1 fits for every dataset, keyed and seeded by space id so the result
/// is independent of scheduling; spaces run in parallel.
fn fit_all_spaces(
    super_data: &SuperDataset,
    cfg: &FitConfig,
    spec: KernelSpec,
) -> Result<Vec<SpaceFit>> {
    let spaces: Vec<(&String, &crate::data::Dataset)> = super_data.datasets.iter().collect();
    let fits: Vec<Result<SpaceFit>> = spaces
        .par_iter()
        .map(|(id, ds)| {
            let sds: Vec<SubDataset> = ds.sub_datasets.values().cloned().collect();
            let cfg_space = cfg.with_seed(derive_seed_tagged(cfg.seed, &["fit", id]));
            fit_gp_mle(&sds, &cfg_space, spec)
                .map(|(params, nll)| SpaceFit {
                    space_id: (*id).clone(),
                    dim: ds.dim,
                    params,
                    nll,
                })
                .map_err(|e| Error::FitFailed {
                    space_id: (*id).clone(),
                    reason: e.to_string(),
                })
        })
        .collect();
    fits.into_iter().collect()
}

/// Two-step pre-training: per-space MLE fits, then the hyper-prior MLE over
/// the fitted parameter sets. The discrete prior over the same fits is
/// packaged alongside.
pub fn pretrain_two_step(
    super_data: &SuperDataset,
    cfg: &FitConfig,
    spec: KernelSpec,
) -> Result<PretrainResult> {
    if super_data.n_datasets() < 2 {
        return Err(Error::InsufficientData(format!(
            "two-step pre-training needs at least 2 datasets, got {}",
            super_data.n_datasets()
        )));
    }
    let start = std::time::Instant::now();
    let per_space_fits = fit_all_spaces(super_data, cfg, spec)?;
    let fitted: Vec<GpParams> = per_space_fits.iter().map(|f| f.params.clone()).collect();
    let hyper_prior = fit_hyper_prior(&fitted)?;
    let discrete_prior = DiscretePrior::new(fitted)?;
    Ok(PretrainResult {
        per_space_fits,
        hyper_prior,
        discrete_prior,
        wallclock_secs: start.elapsed().as_secs_f64(),
    })
}

/// Long-format sweep output; one row per recorded estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub grid: usize,
    pub seed: u64,
    pub parameter: String,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Per-cell failures, recorded rather than fatal.
    pub failures: Vec<String>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("grid,seed,parameter,value\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.grid, r.seed, r.parameter, r.value));
        }
        out
    }

    /// Values for one (grid, parameter) cell across seeds.
    pub fn values_for(&self, grid: usize, parameter: &str) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.grid == grid && r.parameter == parameter)
            .map(|r| r.value)
            .collect()
    }
}

fn check_grid(grid: &[usize]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid_argument("empty sweep grid"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid_argument("sweep grid must be ascending"));
    }
    Ok(())
}

/// Sweep over the number of sub-datasets generated from one fixed GP: for
/// every grid value and seed, generate that many sub-datasets, fit, and
/// record the parameter estimates in long format.
pub fn asymptotics_single_gp(
    generating: &GpParams,
    grid: &[usize],
    obs_per_subdataset: usize,
    n_seeds: usize,
    cfg: &FitConfig,
    spec: KernelSpec,
) -> Result<SweepTable> {
    check_grid(grid)?;
    generating.validate()?;
    if obs_per_subdataset == 0 || n_seeds == 0 {
        return Err(Error::invalid_argument(
            "obs_per_subdataset and n_seeds must be >= 1",
        ));
    }
    let dim = generating.dim();
    let cells: Vec<(usize, u64)> = grid
        .iter()
        .flat_map(|&g| (0..n_seeds as u64).map(move |s| (g, s)))
        .collect();

    let results: Vec<(usize, u64, Result<GpParams>)> = cells
        .par_iter()
        .map(|&(g, s)| {
            let tag = format!("asym1-{g}-{s}");
            let mut rng = rng_from_seed(derive_seed_tagged(cfg.seed, &["gen", &tag]));
            let sds: Result<Vec<SubDataset>> = (0..g)
                .map(|_| {
                    let xs = DMatrix::from_fn(obs_per_subdataset, dim, |_, _| {
                        rng.random_range(0.0..1.0)
                    });
                    let ys = sample_function_values(generating, &xs, spec, &mut rng, true)?;
                    SubDataset::new(xs, ys)
                })
                .collect();
            let fit = sds.and_then(|sds| {
                let cfg_cell = cfg.with_seed(derive_seed_tagged(cfg.seed, &["fit", &tag]));
                fit_gp_mle(&sds, &cfg_cell, spec).map(|(p, _)| p)
            });
            (g, s, fit)
        })
        .collect();

    let mut table = SweepTable::default();
    for (g, s, fit) in results {
        match fit {
            Ok(p) => {
                table.rows.push(SweepRow {
                    grid: g,
                    seed: s,
                    parameter: "constant_mean".into(),
                    value: p.constant_mean,
                });
                for &l in &p.lengthscales {
                    table.rows.push(SweepRow {
                        grid: g,
                        seed: s,
                        parameter: "lengthscale".into(),
                        value: l,
                    });
                }
                table.rows.push(SweepRow {
                    grid: g,
                    seed: s,
                    parameter: "signal_variance".into(),
                    value: p.signal_variance,
                });
                table.rows.push(SweepRow {
                    grid: g,
                    seed: s,
                    parameter: "noise_variance".into(),
                    value: p.noise_variance,
                });
            }
            Err(e) => table.failures.push(format!("grid {g} seed {s}: {e}")),
        }
    }
    Ok(table)
}

/// Settings for the two-step sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoStepSweepConfig {
    pub grid: Vec<usize>,
    pub n_seeds: usize,
    /// Monte-Carlo samples for the optional test-NLL column.
    pub nll_q_samples: usize,
    /// Observation subsample applied to test sub-datasets before NLL.
    pub nll_subsample_obs: Option<usize>,
    /// Observation subsample applied to training sub-datasets before fitting.
    pub fit_subsample_obs: Option<usize>,
}

/// Sweep over the number of training datasets: per seed every available
/// dataset is fitted once (fits are seeded per (seed, space), so refitting
/// per grid value would reproduce the identical parameters); each grid value
/// then subsamples that many datasets, refits the hyper-prior, and records
/// its parameters plus, optionally, the test-set hierarchical NLL.
pub fn asymptotics_two_step(
    train: &SuperDataset,
    test: Option<&SuperDataset>,
    sweep: &TwoStepSweepConfig,
    cfg: &FitConfig,
    spec: KernelSpec,
) -> Result<SweepTable> {
    check_grid(&sweep.grid)?;
    let available = train.n_datasets();
    let max_g = *sweep.grid.last().unwrap();
    if max_g > available {
        return Err(Error::invalid_argument(format!(
            "grid value {max_g} exceeds the {available} available training datasets"
        )));
    }
    if sweep.grid[0] < 2 {
        return Err(Error::invalid_argument(
            "grid values below 2 cannot support a hyper-prior MLE",
        ));
    }
    if sweep.n_seeds == 0 {
        return Err(Error::invalid_argument("n_seeds must be >= 1"));
    }
    let thinned = match sweep.fit_subsample_obs {
        Some(n) => crate::data::thin_observations(train, n, cfg.seed)?,
        None => train.clone(),
    };

    let mut table = SweepTable::default();
    for s in 0..sweep.n_seeds as u64 {
        let cfg_seed = cfg.with_seed(derive_seed(cfg.seed, "two-step-seed", s));
        let fits = fit_all_spaces(&thinned, &cfg_seed, spec)?;
        let ids: Vec<String> = fits.iter().map(|f| f.space_id.clone()).collect();

        for &g in &sweep.grid {
            // uniform subsample of g dataset ids
            let mut idx: Vec<usize> = (0..ids.len()).collect();
            let mut rng =
                rng_from_seed(derive_seed_tagged(cfg.seed, &["select", &s.to_string(), &g.to_string()]));
            for i in 0..g {
                let j = rng.random_range(i..idx.len());
                idx.swap(i, j);
            }
            let chosen: Vec<GpParams> = idx[..g].iter().map(|&i| fits[i].params.clone()).collect();

            match fit_hyper_prior(&chosen) {
                Ok(hp) => {
                    let mut push = |name: &str, value: f64| {
                        table.rows.push(SweepRow {
                            grid: g,
                            seed: s,
                            parameter: name.into(),
                            value,
                        })
                    };
                    push("constant_mean_mu", hp.constant_mean.mu);
                    push("constant_mean_sigma", hp.constant_mean.sigma);
                    push("lengthscale_alpha", hp.lengthscale.alpha);
                    push("lengthscale_beta", hp.lengthscale.beta);
                    push("signal_variance_alpha", hp.signal_variance.alpha);
                    push("signal_variance_beta", hp.signal_variance.beta);
                    push("noise_variance_alpha", hp.noise_variance.alpha);
                    push("noise_variance_beta", hp.noise_variance.beta);

                    if let Some(test_data) = test {
                        match test_nll(&hp, test_data, sweep, cfg.seed, s, g, spec) {
                            Ok(v) => push("test_nll", v),
                            Err(e) => table
                                .failures
                                .push(format!("grid {g} seed {s} test NLL: {e}")),
                        }
                    }
                }
                Err(e) => table.failures.push(format!("grid {g} seed {s}: {e}")),
            }
        }
    }
    Ok(table)
}

/// Mean per-space test NLL (one marginal per sub-dataset, summed within a
/// space), weighted by sub-dataset count.
fn test_nll(
    hp: &HyperPrior,
    test_data: &SuperDataset,
    sweep: &TwoStepSweepConfig,
    base_seed: u64,
    seed: u64,
    grid: usize,
    spec: KernelSpec,
) -> Result<f64> {
    let prior = PriorSource::Hyper(hp.clone());
    let mut weighted = 0.0;
    let mut weight = 0.0;
    for (id, ds) in &test_data.datasets {
        let mut space_total = 0.0;
        for (sub_id, sd) in &ds.sub_datasets {
            let sd = match sweep.nll_subsample_obs {
                Some(n) => subsample_sub_dataset(
                    sd,
                    n,
                    crate::data::subsample_seed(derive_seed(base_seed, "nll-sub", seed), id, sub_id),
                )?,
                None => sd.clone(),
            };
            let mut rng = rng_from_seed(derive_seed_tagged(
                base_seed,
                &["nll", &seed.to_string(), &grid.to_string(), id, sub_id],
            ));
            space_total += hierarchical_nll(
                &prior,
                std::slice::from_ref(&sd),
                sweep.nll_q_samples,
                &mut rng,
                spec,
            )?;
        }
        weighted += space_total;
        weight += ds.sub_datasets.len() as f64;
    }
    Ok(weighted / weight)
}

pub type AsymptoticsTable = SweepTable;
