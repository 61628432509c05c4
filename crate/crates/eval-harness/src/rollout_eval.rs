//! Evaluation rollouts: run a policy for a fixed number of episodes under
//! given dynamics and aggregate the undiscounted returns.
//!
//! Each episode `k` draws from its own rng substreams (`eval-env`,
//! `eval-agent`, `eval-adversary`, indexed by `k`), so episode `k`'s return
//! does not depend on how many other episodes run or in what order they are
//! computed.

use env_suite::{clip_agent, combine_actions, DynamicsParams, Env, EnvId};
use nn_core::{GaussianPolicy, SeedStreams};
use rand::Rng;

use crate::error::{EvalError, Result};
use crate::score::EvalScore;

fn check_dims(role: &str, policy: &GaussianPolicy, env_id: EnvId) -> Result<()> {
    if policy.obs_dim() != env_id.obs_dim() || policy.action_dim() != env_id.action_dim() {
        return Err(EvalError::Shape(format!(
            "{role} maps {} obs dims to {} action dims, but {env_id} has {} and {}",
            policy.obs_dim(),
            policy.action_dim(),
            env_id.obs_dim(),
            env_id.action_dim()
        )));
    }
    Ok(())
}

fn episode_return(
    agent: &GaussianPolicy,
    adversary: Option<(&GaussianPolicy, f64)>,
    env: &mut Env,
    env_rng: &mut impl Rng,
    agent_rng: &mut impl Rng,
    adversary_rng: &mut impl Rng,
) -> Result<f64> {
    let mut obs = env.reset(env_rng);
    let mut total = 0.0;
    loop {
        let (raw_agent, _) = agent.sample(&obs, agent_rng)?;
        let clipped_agent = clip_agent(&raw_agent);
        let action_total = match adversary {
            Some((adv, alpha)) => {
                let (raw_adv, _) = adv.sample(&obs, adversary_rng)?;
                combine_actions(&raw_agent, &raw_adv, alpha)
            }
            None => clipped_agent.clone(),
        };
        let step = env.step(&action_total, &clipped_agent)?;
        total += step.reward;
        if step.done {
            return Ok(total);
        }
        obs = step.obs;
    }
}

/// Per-episode undiscounted returns for `n_rollouts` episodes, optionally
/// against an adversary acting at strength `alpha`.
pub fn rollout_returns(
    agent: &GaussianPolicy,
    adversary: Option<(&GaussianPolicy, f64)>,
    env_id: EnvId,
    params: &DynamicsParams,
    horizon: usize,
    n_rollouts: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if n_rollouts == 0 {
        return Err(EvalError::Config("n_rollouts must be at least 1".into()));
    }
    check_dims("agent", agent, env_id)?;
    if let Some((adv, alpha)) = adversary {
        check_dims("adversary", adv, env_id)?;
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(EvalError::Config(format!(
                "adversary strength must be finite and non-negative, got {alpha}"
            )));
        }
    }
    params.validate(env_id)?;

    let streams = SeedStreams::new(seed);
    let mut env = Env::new(env_id, params.clone(), horizon)?;
    (0..n_rollouts as u64)
        .map(|k| {
            episode_return(
                agent,
                adversary,
                &mut env,
                &mut streams.stream("eval-env", k),
                &mut streams.stream("eval-agent", k),
                &mut streams.stream("eval-adversary", k),
            )
        })
        .collect()
}

/// Score a policy against fixed dynamics, without any adversary.
pub fn evaluate(
    agent: &GaussianPolicy,
    env_id: EnvId,
    params: &DynamicsParams,
    horizon: usize,
    n_rollouts: usize,
    seed: u64,
) -> Result<EvalScore> {
    let returns = rollout_returns(agent, None, env_id, params, horizon, n_rollouts, seed)?;
    EvalScore::from_returns(&returns)
}

/// Score a policy with an adversary perturbing its actions at strength
/// `alpha` (normally the strength it was trained against).
#[allow(clippy::too_many_arguments)]
pub fn evaluate_with_adversary(
    agent: &GaussianPolicy,
    adversary: &GaussianPolicy,
    env_id: EnvId,
    params: &DynamicsParams,
    alpha: f64,
    horizon: usize,
    n_rollouts: usize,
    seed: u64,
) -> Result<EvalScore> {
    let returns = rollout_returns(
        agent,
        Some((adversary, alpha)),
        env_id,
        params,
        horizon,
        n_rollouts,
        seed,
    )?;
    EvalScore::from_returns(&returns)
}
