//! Experiment configuration: a TOML file describing one training-and-
//! evaluation job, its canonical serialization, and its content hash.
//!
//! The canonical form materializes every default and orders keys by struct
//! declaration, so two files that *mean* the same thing — regardless of key
//! order or omitted defaults — canonicalize to identical text and therefore
//! identical hashes.

use std::path::{Path, PathBuf};

use env_suite::{DomainSpec, EnvId};
use eval_harness::EvalSpec;
use ppo_learner::PpoConfig;
use rap_trainer::{Mode, TrainConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

fn default_alpha() -> f64 {
    1.0
}
fn default_iterations() -> usize {
    150
}
fn default_horizon() -> usize {
    env_suite::DEFAULT_HORIZON
}
fn default_checkpoint_every() -> usize {
    25
}

/// Uniform sampling ranges for domain-randomized training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainRanges {
    pub mass: (f64, f64),
    pub friction: (f64, f64),
}

impl Default for DomainRanges {
    fn default() -> Self {
        DomainRanges {
            mass: (0.7, 1.3),
            friction: (0.7, 1.3),
        }
    }
}

/// Everything one experiment needs: the training setup, the seed list, the
/// evaluation spec, and where to write artifacts.
///
/// `mode`, `env_id`, and `seed` are required; every other field has a
/// documented default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub env_id: EnvId,
    /// Master seed: seeds evaluation streams and is the default seed list.
    pub seed: u64,
    /// Training seeds; defaults to `[seed]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    /// Adversary population size (required >= 1 for `rap`).
    #[serde(default)]
    pub n: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    /// Fixed episodes per iteration; unset means "collect exactly
    /// `ppo.train_batch_size` transitions".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rollouts_per_iteration: Option<usize>,
    #[serde(default = "default_checkpoint_every")]
    pub checkpoint_every: usize,
    /// Output directory; `RAP_LAB_OUT` overrides it at run time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub ppo: PpoConfig,
    /// Domain-randomization ranges; only valid (and defaulted) in
    /// `domain_randomization` mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainRanges>,
    #[serde(default)]
    pub eval: EvalSpec,
}

impl ExperimentConfig {
    /// Fill in derived defaults: the seed list, the implicit population of
    /// one for `single_adversary`, and default domain ranges for
    /// `domain_randomization`.
    fn normalize(&mut self) {
        if self.seeds.is_none() {
            self.seeds = Some(vec![self.seed]);
        }
        if self.mode == Mode::SingleAdversary && self.n == 0 {
            self.n = 1;
        }
        if self.mode == Mode::DomainRandomization && self.domain.is_none() {
            self.domain = Some(DomainRanges::default());
        }
    }

    pub fn validate(&self) -> Result<()> {
        let seeds = self.seed_list();
        if seeds.is_empty() {
            return Err(CliError::Config("seeds list is empty".into()));
        }
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != seeds.len() {
            return Err(CliError::Config(format!(
                "seeds contain duplicates: {seeds:?}"
            )));
        }
        self.eval.validate()?;
        // Let the trainer's own validation judge the training fields.
        self.train_config(self.seed)?.validate()?;
        Ok(())
    }

    /// The resolved list of training seeds.
    pub fn seed_list(&self) -> Vec<u64> {
        self.seeds.clone().unwrap_or_else(|| vec![self.seed])
    }

    /// The training configuration for one seed.
    pub fn train_config(&self, seed: u64) -> Result<TrainConfig> {
        let domain_spec = match (&self.mode, &self.domain) {
            (Mode::DomainRandomization, Some(r)) => {
                Some(DomainSpec::uniform(self.env_id, r.mass, r.friction)?)
            }
            (Mode::DomainRandomization, None) => {
                let r = DomainRanges::default();
                Some(DomainSpec::uniform(self.env_id, r.mass, r.friction)?)
            }
            (_, Some(_)) => {
                return Err(CliError::Config(format!(
                    "a [domain] section is only used in domain_randomization mode, not {}",
                    self.mode
                )))
            }
            (_, None) => None,
        };
        Ok(TrainConfig {
            mode: self.mode,
            env_id: self.env_id,
            n: self.n,
            alpha: self.alpha,
            domain_spec,
            ppo: self.ppo.clone(),
            horizon: self.horizon,
            iterations: self.iterations,
            rollouts_per_iteration: self.rollouts_per_iteration,
            seed,
            checkpoint_every: self.checkpoint_every,
        })
    }
}

/// Parse and validate a config from TOML text.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg: ExperimentConfig = toml::from_str(text)?;
    cfg.normalize();
    cfg.validate()?;
    Ok(cfg)
}

/// Load and validate a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Config(format!("cannot read config {}: {e}", path.display()))
    })?;
    parse_config(&text)
}

/// The canonical TOML serialization: all defaults materialized, keys in
/// declaration order. `parse_config(canonical_toml(cfg)) == cfg` and
/// canonicalizing again is a fixed point.
pub fn canonical_toml(cfg: &ExperimentConfig) -> Result<String> {
    Ok(toml::to_string(cfg)?)
}

/// Hex SHA-256 of the canonical serialization.
pub fn config_hash(cfg: &ExperimentConfig) -> Result<String> {
    let canonical = canonical_toml(cfg)?;
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    Ok(format!("{:x}", hasher.finalize()))
}
