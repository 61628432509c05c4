//! Adam optimizer with bias-corrected first and second moments.

use crate::error::{NnError, Result};
use crate::params::{GradientSet, ParameterSet};

/// Default exponential decay for the first moment.
pub const BETA1: f64 = 0.9;
/// Default exponential decay for the second moment.
pub const BETA2: f64 = 0.999;
/// Default denominator fuzz.
pub const EPSILON: f64 = 1e-8;

/// Per-network optimizer state: first/second moment estimates plus the step
/// count used for bias correction.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub m: GradientSet,
    pub v: GradientSet,
    pub step: u64,
}

impl OptimizerState {
    /// Fresh state (all moments zero, step zero) shaped like `params`.
    pub fn new(params: &ParameterSet) -> Self {
        OptimizerState {
            m: GradientSet::zeros_like(params),
            v: GradientSet::zeros_like(params),
            step: 0,
        }
    }
}

/// One Adam update. Returns the updated parameters and state, leaving the
/// inputs untouched:
///
/// ```text
/// m <- b1 m + (1 - b1) g         mhat = m / (1 - b1^t)
/// v <- b2 v + (1 - b2) g^2       vhat = v / (1 - b2^t)
/// p <- p - lr * mhat / (sqrt(vhat) + eps)
/// ```
pub fn adam_step(
    params: &ParameterSet,
    grads: &GradientSet,
    state: &OptimizerState,
    lr: f64,
) -> Result<(ParameterSet, OptimizerState)> {
    adam_step_with(params, grads, state, lr, BETA1, BETA2, EPSILON)
}

/// [`adam_step`] with explicit hyperparameters.
pub fn adam_step_with(
    params: &ParameterSet,
    grads: &GradientSet,
    state: &OptimizerState,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
) -> Result<(ParameterSet, OptimizerState)> {
    if !grads.matches_shape(params) {
        return Err(NnError::Shape(
            "gradient layout does not match parameters".into(),
        ));
    }
    if !grads.is_finite() {
        return Err(NnError::NonFinite("gradients".into()));
    }
    if !(lr.is_finite() && lr > 0.0) {
        return Err(NnError::Config(format!("learning rate must be positive, got {lr}")));
    }
    if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) {
        return Err(NnError::Config(format!(
            "betas must lie in [0, 1), got ({beta1}, {beta2})"
        )));
    }

    let mut new_params = params.clone();
    let mut new_state = state.clone();
    new_state.step += 1;
    let t = new_state.step as i32;
    let bc1 = 1.0 - beta1.powi(t);
    let bc2 = 1.0 - beta2.powi(t);

    let g_bufs = grads.buffers();
    let mut p_bufs = new_params.buffers_mut();
    let mut m_bufs = new_state.m.buffers_mut();
    let mut v_bufs = new_state.v.buffers_mut();
    debug_assert_eq!(g_bufs.len(), p_bufs.len());

    for (((p, g), m), v) in p_bufs
        .iter_mut()
        .zip(g_bufs.iter())
        .zip(m_bufs.iter_mut())
        .zip(v_bufs.iter_mut())
    {
        for i in 0..p.len() {
            let gi = g[i];
            m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
            v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi;
            let mhat = m[i] / bc1;
            let vhat = v[i] / bc2;
            p[i] -= lr * mhat / (vhat.sqrt() + eps);
        }
    }
    drop(p_bufs);
    drop(m_bufs);
    drop(v_bufs);

    if !new_params.is_finite() {
        return Err(NnError::NonFinite("updated parameters".into()));
    }
    Ok((new_params, new_state))
}
