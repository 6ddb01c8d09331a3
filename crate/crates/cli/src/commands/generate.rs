use crate::config::ConfigFile;
use hiergp::data::save_super_dataset;
use hiergp::error::Result;
use std::path::Path;

pub fn run(cfg: &ConfigFile, out_dir: &Path, out: Option<&Path>) -> Result<()> {
    let data = cfg.load_data()?;
    let default = out_dir.join("super_dataset.json");
    let path = out.unwrap_or(&default);
    save_super_dataset(&data, path)?;
    println!(
        "wrote {} ({} datasets, {} sub-datasets)",
        path.display(),
        data.n_datasets(),
        data.n_sub_datasets()
    );
    Ok(())
}
