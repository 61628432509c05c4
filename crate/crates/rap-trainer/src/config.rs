//! Training configuration: which mode, how hard the adversary pushes, and
//! how long to run.

use env_suite::{DomainSpec, EnvId, DEFAULT_HORIZON};
use ppo_learner::PpoConfig;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TrainError};

/// The four training regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Adversary population: one of `n` adversaries, drawn uniformly per
    /// rollout, perturbs the agent's action and is trained zero-sum.
    Rap,
    /// The classic minimax setup — a population of exactly one.
    SingleAdversary,
    /// Plain policy optimization, no perturbation.
    Vanilla,
    /// No adversary; dynamics parameters are drawn fresh per rollout.
    DomainRandomization,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Rap => "rap",
            Mode::SingleAdversary => "single_adversary",
            Mode::Vanilla => "vanilla",
            Mode::DomainRandomization => "domain_randomization",
        }
    }

    /// Whether this mode trains adversary policies at all.
    pub fn is_adversarial(&self) -> bool {
        matches!(self, Mode::Rap | Mode::SingleAdversary)
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = TrainError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rap" => Ok(Mode::Rap),
            "single_adversary" => Ok(Mode::SingleAdversary),
            "vanilla" => Ok(Mode::Vanilla),
            "domain_randomization" => Ok(Mode::DomainRandomization),
            other => Err(TrainError::Config(format!(
                "unknown mode '{other}' (expected rap, single_adversary, vanilla, \
                 or domain_randomization)"
            ))),
        }
    }
}

/// Everything a training run needs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub mode: Mode,
    pub env_id: EnvId,
    /// Adversary population size; must match the mode (see [`Self::validate`]).
    pub n: usize,
    /// Adversary strength: the perturbation is `alpha * clipped adversary
    /// action`.
    pub alpha: f64,
    /// Dynamics ranges for domain-randomization mode only.
    pub domain_spec: Option<DomainSpec>,
    pub ppo: PpoConfig,
    /// Episode step cap.
    pub horizon: usize,
    pub iterations: usize,
    /// Fixed rollout count per iteration; `None` collects episodes until the
    /// agent-transition budget `ppo.train_batch_size` is filled exactly,
    /// truncating the final episode at the boundary.
    pub rollouts_per_iteration: Option<usize>,
    pub seed: u64,
    /// Checkpoint every this many iterations (a final checkpoint is always
    /// written when a checkpoint directory is given).
    pub checkpoint_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            mode: Mode::Vanilla,
            env_id: EnvId::PointWindWalker,
            n: 0,
            alpha: 1.0,
            domain_spec: None,
            ppo: PpoConfig::default(),
            horizon: DEFAULT_HORIZON,
            iterations: 150,
            rollouts_per_iteration: None,
            seed: 0,
            checkpoint_every: 25,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.ppo.validate()?;
        match self.mode {
            Mode::Rap => {
                if self.n < 1 {
                    return Err(TrainError::Config(format!(
                        "rap mode needs a population size n >= 1, got n = {}",
                        self.n
                    )));
                }
            }
            Mode::SingleAdversary => {
                if self.n != 1 {
                    return Err(TrainError::Config(format!(
                        "single_adversary mode means exactly n = 1, got n = {}",
                        self.n
                    )));
                }
            }
            Mode::Vanilla | Mode::DomainRandomization => {
                if self.n != 0 {
                    return Err(TrainError::Config(format!(
                        "{} mode trains no adversaries, got n = {}",
                        self.mode, self.n
                    )));
                }
            }
        }
        match (&self.mode, &self.domain_spec) {
            (Mode::DomainRandomization, None) => {
                return Err(TrainError::Config(
                    "domain_randomization mode needs a domain_spec".into(),
                ));
            }
            (Mode::DomainRandomization, Some(spec)) => spec.validate(self.env_id)?,
            (_, Some(_)) => {
                return Err(TrainError::Config(format!(
                    "domain_spec is only used in domain_randomization mode, not {}",
                    self.mode
                )));
            }
            (_, None) => {}
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(TrainError::Config(format!(
                "alpha must be finite and >= 0, got {}",
                self.alpha
            )));
        }
        if self.horizon == 0 {
            return Err(TrainError::Config("horizon must be at least 1".into()));
        }
        if self.rollouts_per_iteration == Some(0) {
            return Err(TrainError::Config(
                "rollouts_per_iteration must be at least 1 when set".into(),
            ));
        }
        if self.checkpoint_every == 0 {
            return Err(TrainError::Config(
                "checkpoint_every must be at least 1".into(),
            ));
        }
        Ok(())
    }
}
