//! Plain (non-recording) MLP forward pass, used on rollout hot paths.

use crate::error::{NnError, Result};
use crate::params::ParameterSet;

/// Forward pass through a tanh MLP: every layer but the last applies `tanh`,
/// the last is linear. Accumulation order matches the taped forward pass in
/// [`crate::tape`], so both produce identical activations.
pub fn mlp_forward(params: &ParameterSet, input: &[f64]) -> Result<Vec<f64>> {
    if input.len() != params.in_dim() {
        return Err(NnError::Shape(format!(
            "input has {} entries, network expects {}",
            input.len(),
            params.in_dim()
        )));
    }
    if !input.iter().all(|v| v.is_finite()) {
        return Err(NnError::NonFinite("network input".into()));
    }

    let n_layers = params.layers.len();
    let mut h = input.to_vec();
    for (li, layer) in params.layers.iter().enumerate() {
        let out_dim = layer.weight.rows();
        let mut out = Vec::with_capacity(out_dim);
        for o in 0..out_dim {
            let row = layer.weight.row_slice(o);
            let mut acc = 0.0;
            for (w, x) in row.iter().zip(h.iter()) {
                acc += w * x;
            }
            acc += layer.bias.get(0, o);
            if li + 1 < n_layers {
                acc = acc.tanh();
            }
            out.push(acc);
        }
        h = out;
    }
    Ok(h)
}
