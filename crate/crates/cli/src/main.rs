//! Experiment harness CLI: synthetic data generation, two-step pre-training,
//! benchmark BO runs, NLL tables, asymptotics sweeps and SVG plotting.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use hiergp::error::Error;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "hiergp",
    about = "Hierarchical GP pre-training and transfer Bayesian optimization experiments",
    version
)]
struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (created if absent).
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,

    /// Override every seed in the config with this value.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic super-dataset and write it to a file.
    Generate {
        /// Output file (defaults to <out-dir>/super_dataset.json).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run two-step pre-training on the training split and write the result.
    Pretrain {
        /// Output file (defaults to <out-dir>/pretrain.json).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the BO benchmark over every method, seed and test sub-dataset.
    Bo,
    /// Evaluate train/test NLL for every method.
    Nll,
    /// Run the asymptotics sweeps (single-GP and/or two-step).
    Asymptotics {
        #[arg(long, value_parser = ["single", "two-step", "both"], default_value = "both")]
        which: String,
    },
    /// Render a CSV produced by the other subcommands into SVG charts.
    Plot {
        /// Input CSV (regret, NLL or sweep format; detected by header).
        #[arg(long)]
        input: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        // Ignore failure: the global pool may already exist in tests.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match run(&cli) {
        Ok(()) => {}
        Err(e) => {
            let report = serde_json::json!({
                "error": {"kind": e.kind(), "message": e.to_string()}
            });
            eprintln!("{report}");
            let code = match e {
                Error::Config(_) => 2,
                _ => 1,
            };
            std::process::exit(code);
        }
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    std::fs::create_dir_all(&cli.out_dir)?;
    if let Command::Plot { input } = &cli.command {
        return commands::plot::run(input, &cli.out_dir);
    }

    let mut cfg = config::ConfigFile::load(
        cli.config
            .as_deref()
            .ok_or_else(|| Error::config("--config is required"))?,
    )?;
    if let Some(seed) = cli.seed {
        cfg.override_seed(seed);
    }

    match &cli.command {
        Command::Generate { out } => commands::generate::run(&cfg, &cli.out_dir, out.as_deref()),
        Command::Pretrain { out } => commands::pretrain::run(&cfg, &cli.out_dir, out.as_deref()),
        Command::Bo => commands::bo::run(&cfg, &cli.out_dir),
        Command::Nll => commands::nll::run(&cfg, &cli.out_dir),
        Command::Asymptotics { which } => commands::asymptotics::run(&cfg, &cli.out_dir, which),
        Command::Plot { .. } => unreachable!("handled above"),
    }
}
