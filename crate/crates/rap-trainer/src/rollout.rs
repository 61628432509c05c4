//! One episode of zero-sum play: the agent and (optionally) an adversary
//! both observe the same states, the environment steps on their combined
//! action, and two mirrored trajectories come back.

use env_suite::{clip_agent, combine_actions, DynamicsParams, Env, EnvId};
use ppo_learner::{StepRecord, Trajectory};
use rand::Rng;

use crate::error::{Result, TrainError};
use crate::population::PolicyBundle;

/// Play one episode and record it from both sides.
///
/// The adversary, when present, is `(id, bundle)` with a 1-based id that is
/// stamped on both trajectories. Each step the agent and adversary sample
/// from the same observation; the environment is driven by
/// `combine_actions(agent, adversary, alpha)` (or by the clipped agent
/// action alone without an adversary). The adversary's stored reward is the
/// exact negation of the agent's.
///
/// The episode ends when the environment says so (`done` recorded, no
/// bootstrap) or after `max_transitions` steps (truncated: `done` left
/// unset and each side bootstraps with its own value function).
#[allow(clippy::too_many_arguments)]
pub fn collect_rollout(
    agent: &PolicyBundle,
    adversary: Option<(usize, &PolicyBundle)>,
    env_id: EnvId,
    params: &DynamicsParams,
    alpha: f64,
    horizon: usize,
    max_transitions: usize,
    env_rng: &mut impl Rng,
    agent_rng: &mut impl Rng,
    adversary_rng: &mut impl Rng,
) -> Result<(Trajectory, Option<Trajectory>)> {
    if max_transitions == 0 {
        return Err(TrainError::Config(
            "rollout budget must allow at least one transition".into(),
        ));
    }
    let mut env = Env::new(env_id, params.clone(), horizon)?;
    let mut obs = env.reset(env_rng);

    let mut agent_steps = Vec::new();
    let mut adversary_steps = Vec::new();
    let mut episode_done = false;

    while !episode_done && agent_steps.len() < max_transitions {
        let (agent_raw, agent_logp) = agent.policy.sample(&obs, agent_rng)?;
        let agent_clipped = clip_agent(&agent_raw);
        let agent_value = agent.value.value(&obs)?;

        let mut adversary_draw = None;
        let action_total = match adversary {
            Some((_, bundle)) => {
                let (adv_raw, adv_logp) = bundle.policy.sample(&obs, adversary_rng)?;
                let adv_value = bundle.value.value(&obs)?;
                let total = combine_actions(&agent_raw, &adv_raw, alpha);
                adversary_draw = Some((adv_raw, adv_logp, adv_value));
                total
            }
            None => agent_clipped.clone(),
        };

        let step = env.step(&action_total, &agent_clipped)?;
        episode_done = step.done;

        agent_steps.push(StepRecord {
            obs: obs.clone(),
            action: agent_raw,
            logp_old: agent_logp,
            value_old: agent_value,
            reward: step.reward,
            done: step.done,
        });
        if let Some((adv_raw, adv_logp, adv_value)) = adversary_draw {
            adversary_steps.push(StepRecord {
                obs: obs.clone(),
                action: adv_raw,
                logp_old: adv_logp,
                value_old: adv_value,
                reward: -step.reward,
                done: step.done,
            });
        }
        obs = step.obs;
    }

    // Complete episodes carry no tail value; budget-truncated ones bootstrap
    // from each side's own value function at the state left unplayed.
    let (agent_bootstrap, adversary_bootstrap) = if episode_done {
        (0.0, 0.0)
    } else {
        let agent_tail = agent.value.value(&obs)?;
        let adversary_tail = match adversary {
            Some((_, bundle)) => bundle.value.value(&obs)?,
            None => 0.0,
        };
        (agent_tail, adversary_tail)
    };

    let adversary_index = adversary.map(|(i, _)| i);
    let tau_agent = Trajectory {
        steps: agent_steps,
        adversary_index,
        bootstrap_value: agent_bootstrap,
    };
    let tau_adversary = adversary_index.map(|i| Trajectory {
        steps: adversary_steps,
        adversary_index: Some(i),
        bootstrap_value: adversary_bootstrap,
    });
    Ok((tau_agent, tau_adversary))
}
