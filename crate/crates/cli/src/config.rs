//! One JSON document per experiment setup: data source, split, methods and
//! every solver knob. Checked-in configs under `configs/` cover the shipped
//! setups.

use hiergp::bo::BoConfig;
use hiergp::data::{
    generate_synthetic, ground_truth_prior, load_external_meta, load_super_dataset, SplitSpec,
    SuperDataset,
};
use hiergp::error::{Error, Result};
use hiergp::experiment::{hand_specified_prior, BenchmarkConfig, MethodSpec, NllConfig};
use hiergp::pretrain::{FitConfig, TwoStepSweepConfig};
use hiergp::{GpParams, KernelSpec};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DataSection {
    Synthetic {
        n_datasets: usize,
        subdatasets_per: usize,
        obs_per: usize,
        dim_lo: usize,
        dim_hi: usize,
        seed: u64,
        #[serde(default)]
        prior: GenPrior,
    },
    Native {
        path: PathBuf,
    },
    External {
        path: PathBuf,
        #[serde(default)]
        split_path: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenPrior {
    #[default]
    GroundTruth,
    HandSpecified,
}

#[derive(Debug, Clone, Deserialize)]
pub struct BoSection {
    pub budget: usize,
    pub n_init: usize,
    pub r_samples: usize,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub pool_subsample: Option<usize>,
    #[serde(default)]
    pub include_noise_in_acq_variance: bool,
    #[serde(default = "default_true")]
    pub resample_params_each_step: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
pub struct NllSection {
    pub q_samples: usize,
    #[serde(default)]
    pub subsample_obs: Option<usize>,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SingleSweepSection {
    pub constant_mean: f64,
    pub lengthscale: f64,
    pub signal_variance: f64,
    pub noise_variance: f64,
    #[serde(default = "default_dim")]
    pub dim: usize,
    pub grid: Vec<usize>,
    pub obs_per: usize,
    pub n_seeds: usize,
}

fn default_dim() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
pub struct AsymptoticsSection {
    #[serde(default)]
    pub single: Option<SingleSweepSection>,
    #[serde(default)]
    pub two_step: Option<TwoStepSweepConfig>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ConfigFile {
    #[serde(default)]
    pub kernel: KernelSpec,
    pub data: DataSection,
    #[serde(default)]
    pub split: Option<SplitSpec>,
    #[serde(default)]
    pub methods: Vec<MethodSpec>,
    #[serde(default = "FitConfig::lbfgs_default")]
    pub fit: FitConfig,
    #[serde(default)]
    pub fit_subsample_obs: Option<usize>,
    #[serde(default)]
    pub bo: Option<BoSection>,
    #[serde(default)]
    pub nll: Option<NllSection>,
    #[serde(default)]
    pub asymptotics: Option<AsymptoticsSection>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Load {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        let cfg: ConfigFile = serde_json::from_str(&text).map_err(|e| {
            Error::config(format!("invalid config `{}`: {e}", path.display()))
        })?;
        Ok(cfg)
    }

    /// Apply the global `--seed` override: data generation, fits, and the
    /// BO/NLL seed lists all collapse onto the given seed.
    pub fn override_seed(&mut self, seed: u64) {
        if let DataSection::Synthetic { seed: s, .. } = &mut self.data {
            *s = seed;
        }
        self.fit.seed = seed;
        if let Some(bo) = &mut self.bo {
            bo.seeds = vec![seed];
        }
        if let Some(nll) = &mut self.nll {
            nll.seeds = vec![seed];
        }
    }

    pub fn load_data(&self) -> Result<SuperDataset> {
        match &self.data {
            DataSection::Synthetic {
                n_datasets,
                subdatasets_per,
                obs_per,
                dim_lo,
                dim_hi,
                seed,
                prior,
            } => {
                let hp = match prior {
                    GenPrior::GroundTruth => ground_truth_prior(),
                    GenPrior::HandSpecified => hand_specified_prior(),
                };
                generate_synthetic(
                    &hp,
                    *n_datasets,
                    *subdatasets_per,
                    *obs_per,
                    (*dim_lo, *dim_hi),
                    *seed,
                    self.kernel,
                )
            }
            DataSection::Native { path } => load_super_dataset(path),
            DataSection::External { path, split_path } => {
                load_external_meta(path, split_path.as_deref())
            }
        }
    }

    pub fn split_spec(&self) -> Result<SplitSpec> {
        self.split
            .ok_or_else(|| Error::config("config is missing the `split` section"))
    }

    pub fn methods(&self) -> Result<&[MethodSpec]> {
        if self.methods.is_empty() {
            return Err(Error::config("config lists no methods"));
        }
        Ok(&self.methods)
    }

    pub fn benchmark_config(&self) -> Result<BenchmarkConfig> {
        let bo = self
            .bo
            .as_ref()
            .ok_or_else(|| Error::config("config is missing the `bo` section"))?;
        if bo.seeds.is_empty() {
            return Err(Error::config("bo.seeds must not be empty"));
        }
        let mut core = BoConfig::new(bo.budget, bo.n_init, bo.r_samples, 0);
        core.include_noise_in_acq_variance = bo.include_noise_in_acq_variance;
        core.resample_params_each_step = bo.resample_params_each_step;
        Ok(BenchmarkConfig {
            bo: core,
            fit: self.fit.clone(),
            seeds: bo.seeds.clone(),
            pool_subsample: bo.pool_subsample,
            fit_subsample_obs: self.fit_subsample_obs,
        })
    }

    pub fn nll_config(&self) -> Result<NllConfig> {
        let nll = self
            .nll
            .as_ref()
            .ok_or_else(|| Error::config("config is missing the `nll` section"))?;
        if nll.seeds.is_empty() {
            return Err(Error::config("nll.seeds must not be empty"));
        }
        Ok(NllConfig {
            q_samples: nll.q_samples,
            subsample_obs: nll.subsample_obs,
            seeds: nll.seeds.clone(),
            fit: self.fit.clone(),
            fit_subsample_obs: self.fit_subsample_obs,
        })
    }

    pub fn single_sweep_params(&self, s: &SingleSweepSection) -> Result<GpParams> {
        GpParams::isotropic(
            s.constant_mean,
            s.lengthscale,
            s.dim,
            s.signal_variance,
            s.noise_variance,
        )
    }
}
