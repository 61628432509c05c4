//! Generalized advantage estimation.

use crate::error::{PpoError, Result};

/// Compute advantages and value targets for one episode.
///
/// With `δ_t = r_t + γ·V_{t+1} − V_t` (where `V_T` is `bootstrap`):
///
/// ```text
/// A_t      = Σ_{l ≥ 0} (γλ)^l · δ_{t+l}
/// return_t = A_t + V_t
/// ```
///
/// computed by the standard backward recursion `A_t = δ_t + γλ·A_{t+1}`.
/// Advantages are returned raw; batch-level normalization happens in the
/// update step, not here.
pub fn gae(
    rewards: &[f64],
    values: &[f64],
    bootstrap: f64,
    gamma: f64,
    lam: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if rewards.len() != values.len() {
        return Err(PpoError::Shape(format!(
            "{} rewards vs {} values",
            rewards.len(),
            values.len()
        )));
    }
    for (name, v) in [("gamma", gamma), ("lam", lam)] {
        if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
            return Err(PpoError::Config(format!("{name} must lie in [0, 1], got {v}")));
        }
    }
    if !bootstrap.is_finite()
        || !rewards.iter().all(|r| r.is_finite())
        || !values.iter().all(|v| v.is_finite())
    {
        return Err(PpoError::Numeric("non-finite input to advantage estimation".into()));
    }

    let t_max = rewards.len();
    let mut advantages = vec![0.0; t_max];
    let mut next_advantage = 0.0;
    let mut next_value = bootstrap;
    for t in (0..t_max).rev() {
        let delta = rewards[t] + gamma * next_value - values[t];
        next_advantage = delta + gamma * lam * next_advantage;
        advantages[t] = next_advantage;
        next_value = values[t];
    }
    let returns = advantages
        .iter()
        .zip(values.iter())
        .map(|(a, v)| a + v)
        .collect();
    Ok((advantages, returns))
}
