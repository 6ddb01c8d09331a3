use crate::config::ConfigFile;
use hiergp::error::Result;
use hiergp::experiment::run_benchmark;
use std::path::Path;
use std::time::Instant;

pub fn run(cfg: &ConfigFile, out_dir: &Path) -> Result<()> {
    let data = cfg.load_data()?;
    let methods = cfg.methods()?;
    let bench = cfg.benchmark_config()?;
    let split_spec = cfg.split_spec()?;

    let start = Instant::now();
    let report = run_benchmark(&data, &split_spec, methods, &bench, Some(out_dir), cfg.kernel)?;
    let wallclock = start.elapsed().as_secs_f64();

    // runtime metadata lives apart from the deterministic summary
    std::fs::write(
        out_dir.join("meta.json"),
        serde_json::to_string_pretty(&serde_json::json!({
            "wallclock_secs": wallclock,
            "n_trajectories": report.trajectories.len(),
            "n_failures": report.failures.len(),
        }))?,
    )?;

    println!("method, final regret (mean +/- std over seeds), trajectories");
    for c in &report.curves {
        println!(
            "  {:-20} {:.4} +/- {:.4}  ({})",
            c.method, c.final_regret_mean, c.final_regret_std, c.n_trajectories
        );
    }
    if !report.failures.is_empty() {
        println!("{} cell failures (see summary.json)", report.failures.len());
    }
    println!("outputs in {}", out_dir.display());
    Ok(())
}
