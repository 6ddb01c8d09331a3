use crate::config::ConfigFile;
use hiergp::error::Result;
use hiergp::experiment::evaluate_nll;
use std::path::Path;

pub fn run(cfg: &ConfigFile, out_dir: &Path) -> Result<()> {
    let data = cfg.load_data()?;
    let methods = cfg.methods()?;
    let nll_cfg = cfg.nll_config()?;
    let report = evaluate_nll(&data, &cfg.split_spec()?, methods, &nll_cfg, cfg.kernel)?;

    std::fs::write(out_dir.join("nll.csv"), report.to_csv())?;
    std::fs::write(
        out_dir.join("nll_summary.json"),
        serde_json::to_string_pretty(&report)?,
    )?;

    println!("method, train NLL, test NLL (mean +/- std over seeds)");
    for m in &report.summary {
        println!(
            "  {:-20} {:.2} +/- {:.2}   {:.2} +/- {:.2}",
            m.method, m.train_mean, m.train_std, m.test_mean, m.test_std
        );
    }
    if !report.failures.is_empty() {
        println!("{} cell failures (see nll_summary.json)", report.failures.len());
    }
    Ok(())
}
