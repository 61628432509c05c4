//! Holdout test suites: out-of-distribution hi/lo parameter assignments.
//!
//! The validation grid scales mass and friction with scalar coefficients;
//! holdout tests instead assign *per-component* extremes, producing
//! parameter combinations the scalar grid can never reach. Tests are named
//! "A", "B", ... in a fixed order (ascending assignment bitmask, where a set
//! bit means "hi").

use crate::env::EnvId;
use crate::error::{EnvError, Result};
use crate::params::DynamicsParams;

/// Build the holdout suite for an environment.
///
/// PointWindWalker (two friction components, mass fixed at 1): all mixed
/// hi/lo assignments over the components — the uniform all-hi/all-lo cases
/// are excluded because the validation grid already covers them. That yields
/// `2^k − 2 = 2` tests: `{b_x: hi, b_y: lo}` then `{b_x: lo, b_y: hi}`.
///
/// SwingPendulum has a single friction component, so mixing happens across
/// mass and friction instead: the four (mass, friction) ∈ {hi, lo}² corners.
pub fn holdout_suite(env_id: EnvId, hi: f64, lo: f64) -> Result<Vec<(String, DynamicsParams)>> {
    if !(hi.is_finite() && lo.is_finite()) {
        return Err(EnvError::Config(format!(
            "holdout coefficients must be finite, got hi={hi}, lo={lo}"
        )));
    }
    if lo <= 0.0 {
        return Err(EnvError::Config(format!(
            "holdout lo must be positive, got {lo}"
        )));
    }
    if hi <= lo {
        return Err(EnvError::Config(format!(
            "holdout needs hi > lo, got hi={hi}, lo={lo}"
        )));
    }

    let pick = |bit: bool| if bit { hi } else { lo };
    let suite: Vec<DynamicsParams> = match env_id {
        EnvId::PointWindWalker => {
            let k = env_id.friction_components();
            (1..(1usize << k) - 1)
                .map(|mask| DynamicsParams {
                    mass_scale: 1.0,
                    friction_scales: (0..k).map(|j| pick(mask & (1 << j) != 0)).collect(),
                })
                .collect()
        }
        EnvId::SwingPendulum => (0..4usize)
            .map(|mask| DynamicsParams {
                mass_scale: pick(mask & 1 != 0),
                friction_scales: vec![pick(mask & 2 != 0)],
            })
            .collect(),
    };

    Ok(suite
        .into_iter()
        .enumerate()
        .map(|(i, params)| {
            let name = char::from(b'A' + i as u8).to_string();
            (name, params)
        })
        .collect())
}
