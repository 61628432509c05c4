//! `rap-lab` — train, evaluate, and compare robust policies from the
//! command line. One verb per experiment family: `train`, `eval`, `swap`,
//! `sweep`, `report`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use exp_cli::{
    eval_checkpoint, load_config, report, run_experiment, run_sweep, swap_runs, ExperimentConfig,
    Result,
};

#[derive(Parser)]
#[command(
    name = "rap-lab",
    version,
    about = "Adversary-population training and robustness evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train every seed in a config, evaluate, and write a run directory.
    Train {
        /// Experiment config (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Train only this seed, replacing the config's seed list.
        #[arg(long)]
        seed_override: Option<u64>,
    },
    /// Re-evaluate a stored agent checkpoint.
    Eval {
        /// Directory holding agent.ckpt (a seed directory of a run).
        #[arg(long)]
        checkpoint: PathBuf,
        /// Evaluate across the mass x friction transfer grid.
        #[arg(long)]
        grid: bool,
        /// Evaluate on the out-of-distribution holdout suite.
        #[arg(long)]
        holdout: bool,
    },
    /// Build a swap matrix from the checkpoints of one or more runs.
    Swap {
        /// Run directories to pool agents and adversaries from.
        #[arg(long, num_args = 1.., required = true)]
        runs: Vec<PathBuf>,
    },
    /// Retrain at several adversary-population sizes under one step budget.
    Sweep {
        /// Experiment config (TOML); mode is forced to `rap` per count.
        #[arg(long)]
        config: PathBuf,
        /// Population sizes to compare, comma-separated (e.g. 1,2,3,5).
        #[arg(long, value_delimiter = ',', required = true)]
        counts: Vec<usize>,
    },
    /// Verify a run directory's manifest and summarize its results.
    Report {
        /// The run directory to inspect.
        #[arg(long)]
        run: PathBuf,
    },
}

/// Where run directories go: `RAP_LAB_OUT` wins, then the config's
/// `output_dir`, then `./runs`.
fn output_root(cfg: &ExperimentConfig) -> PathBuf {
    if let Ok(root) = std::env::var("RAP_LAB_OUT") {
        if !root.is_empty() {
            return PathBuf::from(root);
        }
    }
    cfg.output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("runs"))
}

fn run_dir_for(cfg: &ExperimentConfig, kind: &str) -> PathBuf {
    output_root(cfg).join(format!("{kind}_{}_{}_seed{}", cfg.mode, cfg.env_id, cfg.seed))
}

fn load_with_override(path: &Path, seed_override: Option<u64>) -> Result<ExperimentConfig> {
    let mut cfg = load_config(path)?;
    if let Some(seed) = seed_override {
        cfg.seed = seed;
        cfg.seeds = Some(vec![seed]);
        cfg.validate()?;
    }
    Ok(cfg)
}

fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Train {
            config,
            seed_override,
        } => {
            let cfg = load_with_override(&config, seed_override)?;
            let out = run_dir_for(&cfg, "run");
            let manifest = run_experiment(&cfg, &out)?;
            println!("run directory: {}", out.display());
            for seed in &manifest.seeds {
                match manifest.failures.get(&seed.to_string()) {
                    Some(reason) => println!("seed {seed}: FAILED — {reason}"),
                    None => println!("seed {seed}: ok"),
                }
            }
            Ok(manifest.failures.is_empty())
        }
        Command::Eval {
            checkpoint,
            grid,
            holdout,
        } => {
            let written = eval_checkpoint(&checkpoint, grid, holdout)?;
            for path in written {
                println!("wrote {}", path.display());
            }
            Ok(true)
        }
        Command::Swap { runs } => {
            let out = swap_runs(&runs)?;
            println!("wrote {}", out.display());
            Ok(true)
        }
        Command::Sweep { config, counts } => {
            let cfg = load_config(&config)?;
            let out = run_dir_for(&cfg, "sweep");
            let manifest = run_sweep(&cfg, &counts, &out)?;
            println!("sweep directory: {}", out.display());
            for (cell, reason) in &manifest.failures {
                println!("{cell}: FAILED — {reason}");
            }
            Ok(manifest.failures.is_empty())
        }
        Command::Report { run } => {
            print!("{}", report(&run)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: some work failed; see messages above");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
