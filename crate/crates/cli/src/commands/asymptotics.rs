use crate::config::ConfigFile;
use hiergp::data::split;
use hiergp::error::{Error, Result};
use hiergp::pretrain::{asymptotics_single_gp, asymptotics_two_step};
use std::path::Path;

pub fn run(cfg: &ConfigFile, out_dir: &Path, which: &str) -> Result<()> {
    let section = cfg
        .asymptotics
        .as_ref()
        .ok_or_else(|| Error::config("config is missing the `asymptotics` section"))?;

    if which == "single" || which == "both" {
        let single = section
            .single
            .as_ref()
            .ok_or_else(|| Error::config("asymptotics.single not configured"))?;
        let generating = cfg.single_sweep_params(single)?;
        let table = asymptotics_single_gp(
            &generating,
            &single.grid,
            single.obs_per,
            single.n_seeds,
            &cfg.fit,
            cfg.kernel,
        )?;
        let path = out_dir.join("asymptotics_single.csv");
        std::fs::write(&path, table.to_csv())?;
        println!(
            "single-GP sweep: {} rows, {} failures -> {}",
            table.rows.len(),
            table.failures.len(),
            path.display()
        );
    }

    if which == "two-step" || which == "both" {
        let sweep = section
            .two_step
            .as_ref()
            .ok_or_else(|| Error::config("asymptotics.two_step not configured"))?;
        let data = cfg.load_data()?;
        let (train, test) = split(&data, &cfg.split_spec()?)?;
        let table = asymptotics_two_step(&train, Some(&test), sweep, &cfg.fit, cfg.kernel)?;
        let path = out_dir.join("asymptotics_two_step.csv");
        std::fs::write(&path, table.to_csv())?;
        println!(
            "two-step sweep: {} rows, {} failures -> {}",
            table.rows.len(),
            table.failures.len(),
            path.display()
        );
    }

    Ok(())
}
