//! Combination of agent and adversary actions for the perturbed-action MDP.

/// Agent actions are clipped to [−1, 1] per dimension.
pub const AGENT_BOUND: f64 = 1.0;
/// Adversary actions are clipped to [−0.25, 0.25] per dimension, before the
/// strength multiplier α is applied.
pub const ADVERSARY_BOUND: f64 = 0.25;

/// Clip every component to the agent's action range.
pub fn clip_agent(action: &[f64]) -> Vec<f64> {
    action.iter().map(|a| a.clamp(-AGENT_BOUND, AGENT_BOUND)).collect()
}

/// Clip every component to the adversary's action range.
pub fn clip_adversary(action: &[f64]) -> Vec<f64> {
    action
        .iter()
        .map(|a| a.clamp(-ADVERSARY_BOUND, ADVERSARY_BOUND))
        .collect()
}

/// The perturbed control entering the dynamics:
/// `clip(a_agent, −1, 1) + α · clip(a_adv, −0.25, 0.25)`, each operand
/// clipped independently before the sum. The sum itself is *not* clipped, so
/// the total ranges over [−1 − 0.25α, 1 + 0.25α].
pub fn combine_actions(a_agent: &[f64], a_adv: &[f64], alpha: f64) -> Vec<f64> {
    assert_eq!(
        a_agent.len(),
        a_adv.len(),
        "agent and adversary actions must share a dimension"
    );
    a_agent
        .iter()
        .zip(a_adv.iter())
        .map(|(&a, &adv)| {
            a.clamp(-AGENT_BOUND, AGENT_BOUND)
                + alpha * adv.clamp(-ADVERSARY_BOUND, ADVERSARY_BOUND)
        })
        .collect()
}
