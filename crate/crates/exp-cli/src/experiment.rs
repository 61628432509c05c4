//! Experiment orchestration: train per seed, evaluate, persist artifacts.
//!
//! A run directory looks like
//!
//! ```text
//! <out>/
//!   config.toml            canonicalized config (hash source)
//!   manifest.json          receipt: hash, seeds, artifacts, failures
//!   swap_matrix.csv        adversarial modes with >= 2 successful seeds
//!   seed_<s>/
//!     agent.ckpt           final agent parameters
//!     adversary_<i>.ckpt   final adversary parameters (adversarial modes)
//!     train_curve.csv      per-iteration return statistics
//!     transfer_grid.csv    mass x friction evaluation grid
//!     transfer_grid.svg    the same grid as a heatmap
//!     holdout.csv          out-of-distribution holdout scores
//! ```
//!
//! Every CSV starts with a comment line carrying the config hash and the
//! seed that produced it, and all content is deterministic: re-running the
//! same config into a fresh directory reproduces every artifact byte for
//! byte (timestamps live only in the manifest).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use env_suite::holdout_suite;
use eval_harness::{
    adversary_count_sweep, grid_to_csv, holdout_eval, holdout_to_csv, swap_matrix, swap_to_csv,
    sweep_to_csv, transfer_grid,
};
use nn_core::{load_checkpoint, GaussianPolicy};
use rap_trainer::{train, IterationStats, PopulationState};

use crate::config::{canonical_toml, config_hash, load_config, ExperimentConfig};
use crate::error::{CliError, Result};
use crate::manifest::{
    read_manifest, unix_now, verify_run_dir, write_manifest, RunManifest, CONFIG_FILE,
};
use crate::svg::emit_heatmap_svg;

/// Artifacts one successful seed contributes, relative to the run root.
fn seed_artifacts(seed: u64) -> Vec<String> {
    vec![
        format!("seed_{seed}/train_curve.csv"),
        format!("seed_{seed}/transfer_grid.csv"),
        format!("seed_{seed}/transfer_grid.svg"),
        format!("seed_{seed}/holdout.csv"),
    ]
}

/// Checkpoint files one seed produces, relative to the run root.
fn seed_checkpoints(cfg: &ExperimentConfig, seed: u64) -> Vec<String> {
    let mut paths = vec![format!("seed_{seed}/agent.ckpt")];
    if cfg.mode.is_adversarial() {
        for i in 1..=cfg.n {
            paths.push(format!("seed_{seed}/adversary_{i}.ckpt"));
        }
    }
    paths
}

/// The complete artifact set a run with these successful seeds must
/// contain — the per-mode schema the tests check completeness against.
pub fn expected_artifacts(cfg: &ExperimentConfig, ok_seeds: &[u64]) -> Vec<String> {
    let mut out = vec![CONFIG_FILE.to_string()];
    for &seed in ok_seeds {
        out.extend(seed_checkpoints(cfg, seed));
        out.extend(seed_artifacts(seed));
    }
    if cfg.mode.is_adversarial() && ok_seeds.len() >= 2 {
        out.push("swap_matrix.csv".to_string());
    }
    out
}

fn curve_to_csv(curve: &[IterationStats], comment: &str) -> String {
    let mut out = format!("# {comment}\n");
    out.push_str("iteration,rollouts,env_steps,mean_return,std_return\n");
    for s in curve {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            s.iteration, s.rollouts, s.env_steps, s.mean_return, s.std_return
        ));
    }
    out
}

/// Train one seed and write its artifacts. Returns the trained population
/// so cross-seed evaluations can reuse it without reloading checkpoints.
fn run_seed(
    cfg: &ExperimentConfig,
    hash: &str,
    seed: u64,
    out_dir: &Path,
) -> Result<PopulationState> {
    let seed_dir = out_dir.join(format!("seed_{seed}"));
    std::fs::create_dir_all(&seed_dir)?;
    let tcfg = cfg.train_config(seed)?;
    let (state, curve) = train(&tcfg, Some(&seed_dir))?;

    let comment = format!("config_hash={hash};seed={seed}");
    std::fs::write(seed_dir.join("train_curve.csv"), curve_to_csv(&curve, &comment))?;

    let grid = transfer_grid(
        &state.agent.policy,
        cfg.env_id,
        cfg.eval.mass_range,
        cfg.eval.friction_range,
        cfg.eval.grid_points,
        cfg.horizon,
        cfg.eval.n_rollouts,
        seed,
    )?;
    std::fs::write(seed_dir.join("transfer_grid.csv"), grid_to_csv(&grid, &comment))?;
    emit_heatmap_svg(&grid, &seed_dir.join("transfer_grid.svg"))?;

    let suite = holdout_suite(cfg.env_id, cfg.eval.holdout_hi, cfg.eval.holdout_lo)?;
    let report = holdout_eval(
        &state.agent.policy,
        cfg.env_id,
        &suite,
        cfg.horizon,
        cfg.eval.n_rollouts,
        seed,
    )?;
    std::fs::write(seed_dir.join("holdout.csv"), holdout_to_csv(&report, &comment))?;

    Ok(state)
}

/// Run a full experiment into `out_dir`: train every seed, evaluate, and
/// write the manifest. Per-seed failures are recorded in the manifest and do
/// not stop the remaining seeds; the returned manifest's `failures` map says
/// what went wrong where.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunManifest> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let hash = config_hash(cfg)?;
    std::fs::write(out_dir.join(CONFIG_FILE), canonical_toml(cfg)?)?;
    let started_at_unix = unix_now();

    let seeds = cfg.seed_list();
    let mut checkpoints = BTreeMap::new();
    let mut artifacts = Vec::new();
    let mut failures = BTreeMap::new();
    let mut trained: Vec<(u64, PopulationState)> = Vec::new();

    for &seed in &seeds {
        match run_seed(cfg, &hash, seed, out_dir) {
            Ok(state) => {
                checkpoints.insert(seed.to_string(), seed_checkpoints(cfg, seed));
                artifacts.extend(seed_artifacts(seed));
                trained.push((seed, state));
            }
            Err(e) => {
                failures.insert(seed.to_string(), e.to_string());
            }
        }
    }

    if cfg.mode.is_adversarial() && trained.len() >= 2 {
        let ok_seeds: Vec<u64> = trained.iter().map(|(s, _)| *s).collect();
        let agents: Vec<GaussianPolicy> =
            trained.iter().map(|(_, st)| st.agent.policy.clone()).collect();
        let adversary_sets: Vec<Vec<GaussianPolicy>> = trained
            .iter()
            .map(|(_, st)| st.adversaries.iter().map(|b| b.policy.clone()).collect())
            .collect();
        let matrix = swap_matrix(
            &ok_seeds,
            &agents,
            &adversary_sets,
            cfg.env_id,
            cfg.alpha,
            cfg.horizon,
            cfg.eval.n_rollouts,
            cfg.seed,
        )?;
        let comment = format!("config_hash={hash};seed={}", cfg.seed);
        std::fs::write(out_dir.join("swap_matrix.csv"), swap_to_csv(&matrix, &comment))?;
        artifacts.push("swap_matrix.csv".to_string());
    }

    let manifest = RunManifest {
        config_hash: hash,
        master_seed: cfg.seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        started_at_unix,
        finished_at_unix: unix_now(),
        seeds,
        checkpoints,
        artifacts,
        failures,
    };
    write_manifest(out_dir, &manifest)?;
    Ok(manifest)
}

fn load_policy(path: &Path) -> Result<GaussianPolicy> {
    let (params, _) = load_checkpoint(path)?;
    Ok(GaussianPolicy::from_params(params)?)
}

/// Find the run config governing a checkpoint directory: `config.toml` in
/// the directory itself, or in its parent (the seed-dir layout).
fn config_for(dir: &Path) -> Result<ExperimentConfig> {
    let own = dir.join(CONFIG_FILE);
    if own.exists() {
        return load_config(&own);
    }
    if let Some(parent) = dir.parent() {
        let up = parent.join(CONFIG_FILE);
        if up.exists() {
            return load_config(&up);
        }
    }
    Err(CliError::Config(format!(
        "no {CONFIG_FILE} found in {} or its parent",
        dir.display()
    )))
}

/// Re-evaluate a stored agent checkpoint: transfer grid and/or holdout
/// suite, written next to the checkpoint as `eval_grid.csv`/`.svg` and
/// `eval_holdout.csv`. Returns the files written.
pub fn eval_checkpoint(checkpoint_dir: &Path, grid: bool, holdout: bool) -> Result<Vec<PathBuf>> {
    if !grid && !holdout {
        return Err(CliError::Config(
            "nothing to do: pass --grid and/or --holdout".into(),
        ));
    }
    let cfg = config_for(checkpoint_dir)?;
    let hash = config_hash(&cfg)?;
    let agent = load_policy(&checkpoint_dir.join("agent.ckpt"))?;
    let comment = format!("config_hash={hash};seed={}", cfg.seed);
    let mut written = Vec::new();

    if grid {
        let g = transfer_grid(
            &agent,
            cfg.env_id,
            cfg.eval.mass_range,
            cfg.eval.friction_range,
            cfg.eval.grid_points,
            cfg.horizon,
            cfg.eval.n_rollouts,
            cfg.seed,
        )?;
        let csv_path = checkpoint_dir.join("eval_grid.csv");
        std::fs::write(&csv_path, grid_to_csv(&g, &comment))?;
        let svg_path = checkpoint_dir.join("eval_grid.svg");
        emit_heatmap_svg(&g, &svg_path)?;
        written.push(csv_path);
        written.push(svg_path);
    }
    if holdout {
        let suite = holdout_suite(cfg.env_id, cfg.eval.holdout_hi, cfg.eval.holdout_lo)?;
        let report = holdout_eval(
            &agent,
            cfg.env_id,
            &suite,
            cfg.horizon,
            cfg.eval.n_rollouts,
            cfg.seed,
        )?;
        let path = checkpoint_dir.join("eval_holdout.csv");
        std::fs::write(&path, holdout_to_csv(&report, &comment))?;
        written.push(path);
    }
    Ok(written)
}

/// Cross-run swap evaluation: pool the trained (agent, adversary set) pairs
/// of every successful seed across the given run directories and rebuild the
/// swap matrix from their checkpoints. All runs must share the environment,
/// adversary strength, and population size, and seeds must be unique across
/// runs. The matrix is written as `swap_matrix.csv` into the first
/// directory; returns that path.
pub fn swap_runs(run_dirs: &[PathBuf]) -> Result<PathBuf> {
    if run_dirs.is_empty() {
        return Err(CliError::Config("no run directories given".into()));
    }
    let mut seeds: Vec<u64> = Vec::new();
    let mut agents: Vec<GaussianPolicy> = Vec::new();
    let mut adversary_sets: Vec<Vec<GaussianPolicy>> = Vec::new();
    let mut reference: Option<ExperimentConfig> = None;

    for dir in run_dirs {
        let manifest = read_manifest(dir)?;
        let cfg = load_config(&dir.join(CONFIG_FILE))?;
        if !cfg.mode.is_adversarial() {
            return Err(CliError::Config(format!(
                "{} was trained in {} mode, which has no adversaries to swap",
                dir.display(),
                cfg.mode
            )));
        }
        if let Some(ref first) = reference {
            if cfg.env_id != first.env_id || cfg.alpha != first.alpha || cfg.n != first.n {
                return Err(CliError::Config(format!(
                    "{} disagrees with the first run on env/alpha/n: \
                     ({}, {}, {}) vs ({}, {}, {})",
                    dir.display(),
                    cfg.env_id,
                    cfg.alpha,
                    cfg.n,
                    first.env_id,
                    first.alpha,
                    first.n
                )));
            }
        }
        for seed in manifest.seeds.iter().filter(|s| {
            !manifest.failures.contains_key(&s.to_string())
        }) {
            if seeds.contains(seed) {
                return Err(CliError::Config(format!(
                    "seed {seed} appears in more than one run; swap labels must be unique"
                )));
            }
            let seed_dir = dir.join(format!("seed_{seed}"));
            let agent = load_policy(&seed_dir.join("agent.ckpt"))?;
            let adversaries = (1..=cfg.n)
                .map(|i| load_policy(&seed_dir.join(format!("adversary_{i}.ckpt"))))
                .collect::<Result<Vec<_>>>()?;
            seeds.push(*seed);
            agents.push(agent);
            adversary_sets.push(adversaries);
        }
        if reference.is_none() {
            reference = Some(cfg);
        }
    }
    let cfg = reference.expect("at least one run directory");
    if seeds.len() < 2 {
        return Err(CliError::Config(format!(
            "swap needs at least two successfully trained seeds, found {}",
            seeds.len()
        )));
    }
    let matrix = swap_matrix(
        &seeds,
        &agents,
        &adversary_sets,
        cfg.env_id,
        cfg.alpha,
        cfg.horizon,
        cfg.eval.n_rollouts,
        cfg.seed,
    )?;
    let hash = config_hash(&cfg)?;
    let comment = format!("config_hash={hash};seed={}", cfg.seed);
    let out = run_dirs[0].join("swap_matrix.csv");
    std::fs::write(&out, swap_to_csv(&matrix, &comment))?;
    Ok(out)
}

/// Adversary-count sweep: retrain the base config at each population count
/// under one fixed per-iteration step budget and compare transfer scores.
/// Writes `sweep.csv`, the canonical config, and a manifest into `out_dir`.
pub fn run_sweep(
    cfg: &ExperimentConfig,
    counts: &[usize],
    out_dir: &Path,
) -> Result<RunManifest> {
    std::fs::create_dir_all(out_dir)?;
    let hash = config_hash(cfg)?;
    std::fs::write(out_dir.join(CONFIG_FILE), canonical_toml(cfg)?)?;
    let started_at_unix = unix_now();

    let base = cfg.train_config(cfg.seed)?;
    let seeds = cfg.seed_list();
    let report = adversary_count_sweep(&base, counts, &seeds, &cfg.eval)?;
    let comment = format!("config_hash={hash};seed={}", cfg.seed);
    std::fs::write(out_dir.join("sweep.csv"), sweep_to_csv(&report, &comment))?;

    let mut failures = BTreeMap::new();
    for cell in &report.cells {
        if let Err(reason) = &cell.outcome {
            failures.insert(format!("n={} seed={}", cell.count, cell.seed), reason.clone());
        }
    }
    let manifest = RunManifest {
        config_hash: hash,
        master_seed: cfg.seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        started_at_unix,
        finished_at_unix: unix_now(),
        seeds,
        checkpoints: BTreeMap::new(),
        artifacts: vec!["sweep.csv".to_string()],
        failures,
    };
    write_manifest(out_dir, &manifest)?;
    Ok(manifest)
}

/// Human-readable summary of a finished run directory. Verifies the
/// manifest first, so a tampered or incomplete run reports an error instead
/// of misleading numbers.
pub fn report(run_dir: &Path) -> Result<String> {
    let manifest = verify_run_dir(run_dir)?;
    let cfg = load_config(&run_dir.join(CONFIG_FILE))?;
    let mut out = String::new();
    out.push_str(&format!("run        {}\n", run_dir.display()));
    out.push_str(&format!("mode       {}\n", cfg.mode));
    out.push_str(&format!("env        {}\n", cfg.env_id));
    out.push_str(&format!("config     sha256:{}\n", manifest.config_hash));
    out.push_str(&format!("seeds      {:?}\n", manifest.seeds));
    out.push_str(&format!(
        "artifacts  {} files, all present\n",
        manifest.artifacts.len()
            + manifest.checkpoints.values().map(Vec::len).sum::<usize>()
    ));
    for seed in &manifest.seeds {
        let key = seed.to_string();
        if let Some(reason) = manifest.failures.get(&key) {
            out.push_str(&format!("seed {seed}: FAILED — {reason}\n"));
            continue;
        }
        let curve_path = run_dir.join(format!("seed_{seed}/train_curve.csv"));
        if let Ok(text) = std::fs::read_to_string(&curve_path) {
            if let Some(last) = text.lines().filter(|l| !l.starts_with(['#'])).skip(1).last()
            {
                let fields: Vec<&str> = last.split(',').collect();
                if fields.len() == 5 {
                    out.push_str(&format!(
                        "seed {seed}: final mean return {} (std {}) after {} iterations\n",
                        fields[3],
                        fields[4],
                        fields[0].parse::<u64>().map_or(0, |i| i + 1)
                    ));
                }
            }
        }
    }
    if !manifest.failures.is_empty() {
        out.push_str(&format!("{} seed(s) failed\n", manifest.failures.len()));
    }
    Ok(out)
}

/// Parse a transfer-grid CSV back into a [`TransferGrid`]-shaped summary
/// (means only; used by `report` helpers and tests).
pub fn read_grid_means(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let mut cells = Vec::new();
        for field in line.split(',').skip(1) {
            let mean = field
                .split(';')
                .next()
                .and_then(|m| m.parse::<f64>().ok())
                .ok_or_else(|| {
                    CliError::Config(format!("unparseable grid cell '{field}' in {}", path.display()))
                })?;
            cells.push(mean);
        }
        rows.push(cells);
    }
    Ok(rows)
}

/// Make a tiny but real [`TransferGrid`] by evaluating a policy; test
/// support for the SVG and CSV paths that need one.
#[cfg(test)]
pub(crate) fn tiny_grid() -> eval_harness::TransferGrid {
    use rand_chacha::rand_core::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let agent = GaussianPolicy::xavier(3, 1, &[8], &mut rng).unwrap();
    transfer_grid(
        &agent,
        env_suite::EnvId::SwingPendulum,
        (0.9, 1.1),
        (0.9, 1.1),
        2,
        20,
        2,
        5,
    )
    .unwrap()
}
