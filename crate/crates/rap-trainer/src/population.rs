//! The trainable cast: one agent plus a population of adversaries, each a
//! policy / value-function / optimizer bundle.

use nn_core::{GaussianPolicy, SeedStreams, ValueFn, DEFAULT_HIDDEN};
use ppo_learner::PpoOptimizer;
use rand::Rng;

use crate::config::TrainConfig;
use crate::error::{Result, TrainError};

/// One trainable policy with its value function and optimizer state.
#[derive(Debug, Clone)]
pub struct PolicyBundle {
    pub policy: GaussianPolicy,
    pub value: ValueFn,
    pub opt: PpoOptimizer,
}

impl PolicyBundle {
    fn xavier(obs_dim: usize, action_dim: usize, rng: &mut impl Rng) -> Result<Self> {
        let policy = GaussianPolicy::xavier(obs_dim, action_dim, &DEFAULT_HIDDEN, rng)?;
        let value = ValueFn::xavier(obs_dim, &DEFAULT_HIDDEN, rng)?;
        let opt = PpoOptimizer::new(&policy, &value);
        Ok(PolicyBundle { policy, value, opt })
    }
}

/// Everything that evolves over a training run.
#[derive(Debug, Clone)]
pub struct PopulationState {
    pub agent: PolicyBundle,
    /// Adversaries in id order; adversary `i` (1-based) is `adversaries[i-1]`.
    pub adversaries: Vec<PolicyBundle>,
    /// Global rollout counter; keys the per-rollout rng streams so repeated
    /// iterations never reuse a stream.
    pub rollouts_collected: u64,
    /// Total environment transitions stepped so far.
    pub env_steps: u64,
    pub iterations_done: u64,
}

/// Initialize the agent and its `cfg.n` adversaries, each from its own seed
/// stream (stream index = policy id: agent 0, adversary `i` at `i`).
///
/// Adversaries act on the same action space and see the same observations as
/// the agent, so all networks share the agent's dimensions.
pub fn init_population(cfg: &TrainConfig) -> Result<PopulationState> {
    cfg.validate()?;
    let streams = SeedStreams::new(cfg.seed);
    let obs_dim = cfg.env_id.obs_dim();
    let action_dim = cfg.env_id.action_dim();

    let mut agent_rng = streams.stream("policy-init", 0);
    let agent = PolicyBundle::xavier(obs_dim, action_dim, &mut agent_rng)?;
    let adversaries = (1..=cfg.n as u64)
        .map(|id| {
            let mut rng = streams.stream("policy-init", id);
            PolicyBundle::xavier(obs_dim, action_dim, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(PopulationState {
        agent,
        adversaries,
        rollouts_collected: 0,
        env_steps: 0,
        iterations_done: 0,
    })
}

/// Draw which adversary plays the next rollout, uniformly from `{1..n}`.
pub fn sample_adversary(n: usize, rng: &mut impl Rng) -> Result<usize> {
    if n == 0 {
        return Err(TrainError::Config(
            "cannot sample an adversary from an empty population".into(),
        ));
    }
    Ok(rng.gen_range(1..=n))
}
