use crate::config::ConfigFile;
use hiergp::data::{split, thin_observations};
use hiergp::error::Result;
use hiergp::pretrain::pretrain_two_step;
use std::path::Path;

pub fn run(cfg: &ConfigFile, out_dir: &Path, out: Option<&Path>) -> Result<()> {
    let data = cfg.load_data()?;
    let (train, _) = split(&data, &cfg.split_spec()?)?;
    let train = match cfg.fit_subsample_obs {
        Some(n) => thin_observations(&train, n, cfg.fit.seed)?,
        None => train,
    };
    let result = pretrain_two_step(&train, &cfg.fit, cfg.kernel)?;

    let default = out_dir.join("pretrain.json");
    let path = out.unwrap_or(&default);
    std::fs::write(path, result.to_json()?)?;

    println!(
        "pre-trained on {} spaces in {:.1}s -> {}",
        result.per_space_fits.len(),
        result.wallclock_secs,
        path.display()
    );
    println!(
        "  lengthscale prior Gamma(alpha {:.3}, beta {:.3}); constant mean Normal({:.3}, {:.3})",
        result.hyper_prior.lengthscale.alpha,
        result.hyper_prior.lengthscale.beta,
        result.hyper_prior.constant_mean.mu,
        result.hyper_prior.constant_mean.sigma,
    );
    Ok(())
}
