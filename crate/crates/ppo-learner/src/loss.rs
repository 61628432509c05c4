//! The clipped-surrogate training objective as a differentiable graph.
//!
//! One [`Tape`] holds both networks; a single reverse sweep yields policy and
//! value gradients together. The log-density subgraph replays exactly the
//! arithmetic of `nn_core::gaussian_logp` (same operations, same order), so
//! when parameters have not moved since rollout the probability ratio is
//! exactly 1 and the surrogate equals the mean advantage bit for bit.

use nn_core::{
    net_forward, register_net, GradientSet, ParameterSet, Tape, Tensor, LOG_STD_MAX, LOG_STD_MIN,
};

use crate::config::PpoConfig;
use crate::error::{PpoError, Result};

/// A flat batch of transitions ready for the loss graph.
///
/// `actions` are the raw sampled actions (pre-clip) whose densities were
/// recorded, `logp_old` the densities at collection time, `advantages` the
/// (already normalized) advantage estimates, `returns` the value targets.
#[derive(Debug, Clone)]
pub struct BatchData {
    pub obs: Tensor,
    pub actions: Tensor,
    pub logp_old: Tensor,
    pub advantages: Tensor,
    pub returns: Tensor,
}

impl BatchData {
    pub fn new(
        obs: Tensor,
        actions: Tensor,
        logp_old: Tensor,
        advantages: Tensor,
        returns: Tensor,
    ) -> Result<Self> {
        let n = obs.rows();
        if n == 0 {
            return Err(PpoError::Shape("empty batch".into()));
        }
        if actions.rows() != n {
            return Err(PpoError::Shape(format!(
                "{} observations vs {} actions",
                n,
                actions.rows()
            )));
        }
        for (name, t) in [
            ("logp_old", &logp_old),
            ("advantages", &advantages),
            ("returns", &returns),
        ] {
            if t.shape() != (n, 1) {
                return Err(PpoError::Shape(format!(
                    "{name} must be {n}x1, got {:?}",
                    t.shape()
                )));
            }
        }
        for (name, t) in [
            ("obs", &obs),
            ("actions", &actions),
            ("logp_old", &logp_old),
            ("advantages", &advantages),
            ("returns", &returns),
        ] {
            if !t.is_finite() {
                return Err(PpoError::Numeric(format!("non-finite {name} in batch")));
            }
        }
        Ok(BatchData {
            obs,
            actions,
            logp_old,
            advantages,
            returns,
        })
    }

    pub fn len(&self) -> usize {
        self.obs.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-gather a minibatch.
    pub fn gather(&self, indices: &[usize]) -> BatchData {
        let take = |t: &Tensor| {
            let mut data = Vec::with_capacity(indices.len() * t.cols());
            for &i in indices {
                data.extend_from_slice(t.row_slice(i));
            }
            Tensor::from_vec(indices.len(), t.cols(), data).expect("gather preserves shape")
        };
        BatchData {
            obs: take(&self.obs),
            actions: take(&self.actions),
            logp_old: take(&self.logp_old),
            advantages: take(&self.advantages),
            returns: take(&self.returns),
        }
    }
}

/// The scalar pieces of one loss evaluation.
///
/// `total = -surrogate + value_coeff * value_loss - entropy_coeff * entropy`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LossParts {
    pub total: f64,
    pub surrogate: f64,
    pub value_loss: f64,
    pub entropy: f64,
}

/// Evaluate the clipped objective and its gradients for both networks.
///
/// Returns the loss parts plus `(policy_grads, value_grads)`. Non-finite
/// results (an exploding ratio, an overflowing value error) surface as
/// [`PpoError::Numeric`] so callers can skip the minibatch rather than apply
/// garbage.
pub fn loss_and_grads(
    policy: &ParameterSet,
    value: &ParameterSet,
    batch: &BatchData,
    cfg: &PpoConfig,
) -> Result<(LossParts, GradientSet, GradientSet)> {
    if policy.log_std.is_none() {
        return Err(PpoError::Config("policy parameters lack a log_std head".into()));
    }
    let n = batch.len();
    if batch.obs.cols() != policy.in_dim() || batch.obs.cols() != value.in_dim() {
        return Err(PpoError::Shape(format!(
            "batch obs dim {} vs policy in {} / value in {}",
            batch.obs.cols(),
            policy.in_dim(),
            value.in_dim()
        )));
    }
    if batch.actions.cols() != policy.out_dim() {
        return Err(PpoError::Shape(format!(
            "batch action dim {} vs policy out {}",
            batch.actions.cols(),
            policy.out_dim()
        )));
    }
    if value.out_dim() != 1 {
        return Err(PpoError::Shape(format!(
            "value network must output 1 scalar, got {}",
            value.out_dim()
        )));
    }

    let half_ln_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
    let half_ln_2pi_e = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();

    let mut tape = Tape::new();
    let pnet = register_net(&mut tape, policy);
    let vnet = register_net(&mut tape, value);
    let obs = tape.constant(batch.obs.clone());
    let actions = tape.constant(batch.actions.clone());
    let logp_old = tape.constant(batch.logp_old.clone());
    let advantages = tape.constant(batch.advantages.clone());
    let returns = tape.constant(batch.returns.clone());

    // New log densities, replaying gaussian_logp's arithmetic exactly.
    let mu = net_forward(&mut tape, &pnet, obs);
    let ls_raw = pnet.log_std_id.expect("checked above");
    let ls = tape.clamp(ls_raw, LOG_STD_MIN, LOG_STD_MAX);
    let neg_ls = tape.scale(ls, -1.0);
    let inv_sigma = tape.exp(neg_ls);
    let inv_sigma_b = tape.broadcast_row(inv_sigma, n);
    let diff = tape.sub(actions, mu);
    let z = tape.mul(diff, inv_sigma_b);
    let zz = tape.mul(z, z);
    let neg_half_zz = tape.scale(zz, -0.5);
    let ls_b = tape.broadcast_row(ls, n);
    let centered = tape.sub(neg_half_zz, ls_b);
    let per_dim = tape.add_scalar(centered, -half_ln_2pi);
    let logp_new = tape.row_sums(per_dim);

    // Clipped surrogate, elementwise min of the two arms.
    let log_ratio = tape.sub(logp_new, logp_old);
    let ratio = tape.exp(log_ratio);
    let unclipped = tape.mul(ratio, advantages);
    let ratio_clipped = tape.clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
    let clipped = tape.mul(ratio_clipped, advantages);
    let surr = tape.min(unclipped, clipped);
    let mean_surr = tape.mean_all(surr);
    let neg_surr = tape.scale(mean_surr, -1.0);

    // Value regression.
    let v_pred = net_forward(&mut tape, &vnet, obs);
    let v_err = tape.sub(v_pred, returns);
    let v_sq = tape.mul(v_err, v_err);
    let v_loss = tape.mean_all(v_sq);
    let v_term = tape.scale(v_loss, cfg.value_coeff);

    // Entropy bonus; observation-independent for a free log_std.
    let ent_per_dim = tape.add_scalar(ls, half_ln_2pi_e);
    let entropy = tape.row_sums(ent_per_dim);
    let ent_term = tape.scale(entropy, -cfg.entropy_coeff);

    let partial = tape.add(neg_surr, v_term);
    let total = tape.add(partial, ent_term);

    let parts = LossParts {
        total: tape.value(total).scalar(),
        surrogate: tape.value(mean_surr).scalar(),
        value_loss: tape.value(v_loss).scalar(),
        entropy: tape.value(entropy).scalar(),
    };
    if !parts.total.is_finite() {
        return Err(PpoError::Numeric(format!(
            "non-finite loss: surrogate {}, value_loss {}",
            parts.surrogate, parts.value_loss
        )));
    }

    let leaf_grads = tape.backward(total)?;
    let policy_grads = pnet.extract_grads(&leaf_grads);
    let value_grads = vnet.extract_grads(&leaf_grads);
    if !policy_grads.is_finite() || !value_grads.is_finite() {
        return Err(PpoError::Numeric("non-finite gradients".into()));
    }
    Ok((parts, policy_grads, value_grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nn_core::{gaussian_logp, xavier_init, LayerParams, ParameterSet};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// A single-layer network computing exactly zero everywhere.
    fn zero_net(in_dim: usize, out_dim: usize, with_log_std: bool) -> ParameterSet {
        let params = ParameterSet {
            layers: vec![LayerParams {
                weight: Tensor::zeros(out_dim, in_dim),
                bias: Tensor::zeros(1, out_dim),
            }],
            log_std: None,
        };
        if with_log_std {
            params.with_zero_log_std()
        } else {
            params
        }
    }

    fn default_cfg() -> PpoConfig {
        PpoConfig::default()
    }

    #[test]
    fn unchanged_parameters_give_ratio_one_and_surrogate_mean_advantage() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let policy = xavier_init(&[(4, 8), (8, 2)], &mut rng)
            .unwrap()
            .with_zero_log_std();
        let value = xavier_init(&[(4, 8), (8, 1)], &mut rng).unwrap();

        let n = 6;
        let mut obs_data = Vec::new();
        let mut act_data = Vec::new();
        let mut logp_data = Vec::new();
        let mut adv_data = Vec::new();
        for _ in 0..n {
            let o: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let a: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let mean = nn_core::mlp_forward(&policy, &o).unwrap();
            let logp =
                gaussian_logp(&mean, policy.log_std.as_deref().unwrap(), &a).unwrap();
            obs_data.extend_from_slice(&o);
            act_data.extend_from_slice(&a);
            logp_data.push(logp);
            adv_data.push(rng.gen_range(-2.0..2.0));
        }
        let batch = BatchData::new(
            Tensor::from_vec(n, 4, obs_data).unwrap(),
            Tensor::from_vec(n, 2, act_data).unwrap(),
            Tensor::from_vec(n, 1, logp_data).unwrap(),
            Tensor::from_vec(n, 1, adv_data.clone()).unwrap(),
            Tensor::zeros(n, 1),
        )
        .unwrap();

        let (parts, _, _) = loss_and_grads(&policy, &value, &batch, &default_cfg()).unwrap();
        let expected = adv_data.iter().sum::<f64>() / n as f64;
        assert_eq!(
            parts.surrogate.to_bits(),
            expected.to_bits(),
            "surrogate {} vs mean advantage {}",
            parts.surrogate,
            expected
        );
    }

    #[test]
    fn large_ratio_with_positive_advantage_is_clipped() {
        // mu = 0, sigma = 1, action 0: logp_new = -0.5 ln(2 pi). Shifting
        // logp_old by -ln 2 makes the ratio 2, so with advantage 1 and
        // clip 0.3 the surrogate is 1.3 and (value/entropy terms zeroed)
        // the loss is -1.3.
        let policy = zero_net(1, 1, true);
        let value = zero_net(1, 1, false);
        let logp_new = -0.5 * (2.0 * std::f64::consts::PI).ln();
        let batch = BatchData::new(
            Tensor::from_vec(1, 1, vec![0.4]).unwrap(),
            Tensor::zeros(1, 1),
            Tensor::from_vec(1, 1, vec![logp_new - 2.0_f64.ln()]).unwrap(),
            Tensor::from_vec(1, 1, vec![1.0]).unwrap(),
            Tensor::zeros(1, 1),
        )
        .unwrap();
        let (parts, _, _) = loss_and_grads(&policy, &value, &batch, &default_cfg()).unwrap();
        assert!((parts.surrogate - 1.3).abs() < 1e-12, "{}", parts.surrogate);
        assert!((parts.total - (-1.3)).abs() < 1e-12, "{}", parts.total);
    }

    #[test]
    fn four_transition_batch_matches_hand_computation() {
        // Zero networks make every mean 0, sigma 1, predicted value 0, so
        // each piece can be recomputed with scalar arithmetic.
        let policy = zero_net(1, 1, true);
        let value = zero_net(1, 1, false);
        let cfg = default_cfg();
        assert_eq!(cfg.clip_eps, 0.3);
        assert_eq!(cfg.value_coeff, 1.0);
        assert_eq!(cfg.entropy_coeff, 0.0);

        let actions = [0.5, -1.0, 0.0, 2.0];
        let offsets = [-0.2, 0.45, 0.0, -0.5];
        let advantages = [1.0, -2.0, 0.5, 1.5];
        let returns = [0.5, -0.3, 1.2, -2.0];
        let half_ln_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
        let logp = |a: f64| -0.5 * a * a - half_ln_2pi;
        let logp_old: Vec<f64> = actions
            .iter()
            .zip(offsets.iter())
            .map(|(&a, &off)| logp(a) + off)
            .collect();

        let batch = BatchData::new(
            Tensor::from_vec(4, 1, vec![0.1, -0.4, 0.9, 0.0]).unwrap(),
            Tensor::from_vec(4, 1, actions.to_vec()).unwrap(),
            Tensor::from_vec(4, 1, logp_old).unwrap(),
            Tensor::from_vec(4, 1, advantages.to_vec()).unwrap(),
            Tensor::from_vec(4, 1, returns.to_vec()).unwrap(),
        )
        .unwrap();
        let (parts, _, _) = loss_and_grads(&policy, &value, &batch, &cfg).unwrap();

        let mut surr_sum = 0.0;
        for i in 0..4 {
            let ratio = (-offsets[i]).exp();
            let unclipped = ratio * advantages[i];
            let clipped = ratio.clamp(0.7, 1.3) * advantages[i];
            surr_sum += unclipped.min(clipped);
        }
        let surrogate = surr_sum / 4.0;
        let value_loss = returns.iter().map(|r| r * r).sum::<f64>() / 4.0;
        let entropy = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
        let total = -surrogate + 1.0 * value_loss - 0.0 * entropy;

        assert!((parts.surrogate - surrogate).abs() < 1e-10);
        assert!((parts.value_loss - value_loss).abs() < 1e-10);
        assert!((parts.entropy - entropy).abs() < 1e-10);
        assert!((parts.total - total).abs() < 1e-10);
    }

    /// Build a reproducible small-net batch for gradient checks. The stale
    /// log-density offsets put the four ratio regimes (unclipped both signs,
    /// clipped high, clipped low) in play while staying clear of the clip
    /// boundaries, where the objective is not differentiable.
    fn gradient_check_setup() -> (ParameterSet, ParameterSet, BatchData) {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let policy = xavier_init(&[(3, 4), (4, 2)], &mut rng)
            .unwrap()
            .with_zero_log_std();
        let value = xavier_init(&[(3, 4), (4, 1)], &mut rng).unwrap();

        let offsets = [-0.2, 0.45, 0.0, -0.4, 0.15, 0.3];
        let advantages = [1.5, -0.8, 0.6, 1.0, -1.2, 0.9];
        let n = offsets.len();
        let mut obs_data = Vec::new();
        let mut act_data = Vec::new();
        let mut logp_data = Vec::new();
        let mut ret_data = Vec::new();
        for offset in offsets {
            let o: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let a: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mean = nn_core::mlp_forward(&policy, &o).unwrap();
            let logp =
                gaussian_logp(&mean, policy.log_std.as_deref().unwrap(), &a).unwrap();
            obs_data.extend_from_slice(&o);
            act_data.extend_from_slice(&a);
            logp_data.push(logp + offset);
            ret_data.push(rng.gen_range(-1.0..1.0));
        }
        let batch = BatchData::new(
            Tensor::from_vec(n, 3, obs_data).unwrap(),
            Tensor::from_vec(n, 2, act_data).unwrap(),
            Tensor::from_vec(n, 1, logp_data).unwrap(),
            Tensor::from_vec(n, 1, advantages.to_vec()).unwrap(),
            Tensor::from_vec(n, 1, ret_data).unwrap(),
        )
        .unwrap();
        (policy, value, batch)
    }

    #[test]
    fn analytic_gradients_match_central_differences() {
        let (policy, value, batch) = gradient_check_setup();
        let cfg = default_cfg();
        let (_, pg, vg) = loss_and_grads(&policy, &value, &batch, &cfg).unwrap();

        let flatten = |g: &GradientSet| {
            let mut flat = Vec::new();
            for buf in g.buffers() {
                flat.extend_from_slice(buf);
            }
            flat
        };
        let analytic: Vec<f64> = flatten(&pg).into_iter().chain(flatten(&vg)).collect();

        let loss_at = |p: &ParameterSet, v: &ParameterSet| {
            loss_and_grads(p, v, &batch, &cfg).unwrap().0.total
        };
        let h = 1e-5;
        let mut checked = 0;
        let mut param_index = 0;
        for net in [true, false] {
            let base = if net { &policy } else { &value };
            let n_params = base.param_count();
            for k in 0..n_params {
                let mut plus = base.clone();
                let mut minus = base.clone();
                nudge(&mut plus, k, h);
                nudge(&mut minus, k, -h);
                let (lp, lm) = if net {
                    (loss_at(&plus, &value), loss_at(&minus, &value))
                } else {
                    (loss_at(&policy, &plus), loss_at(&policy, &minus))
                };
                let fd = (lp - lm) / (2.0 * h);
                let a = analytic[param_index];
                let denom = fd.abs().max(a.abs()).max(1e-6);
                assert!(
                    (fd - a).abs() / denom < 1e-4,
                    "param {param_index}: fd {fd} vs analytic {a}"
                );
                param_index += 1;
                checked += 1;
            }
        }
        assert_eq!(checked, policy.param_count() + value.param_count());
        assert!(checked <= 200, "gradient check is meant for small nets");
    }

    /// Add `delta` to the `k`-th scalar parameter in buffer order.
    fn nudge(params: &mut ParameterSet, k: usize, delta: f64) {
        let mut remaining = k;
        for buf in params.buffers_mut() {
            if remaining < buf.len() {
                buf[remaining] += delta;
                return;
            }
            remaining -= buf.len();
        }
        panic!("parameter index {k} out of range");
    }

    #[test]
    fn gradient_step_decreases_the_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let policy = xavier_init(&[(4, 16), (16, 2)], &mut rng)
            .unwrap()
            .with_zero_log_std();
        let value = xavier_init(&[(4, 16), (16, 1)], &mut rng).unwrap();
        let n = 64;
        let mut obs_data = Vec::new();
        let mut act_data = Vec::new();
        let mut logp_data = Vec::new();
        let mut adv_data = Vec::new();
        let mut ret_data = Vec::new();
        for _ in 0..n {
            let o: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let a: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let mean = nn_core::mlp_forward(&policy, &o).unwrap();
            let logp =
                gaussian_logp(&mean, policy.log_std.as_deref().unwrap(), &a).unwrap();
            obs_data.extend_from_slice(&o);
            act_data.extend_from_slice(&a);
            logp_data.push(logp + rng.gen_range(-0.1..0.1));
            adv_data.push(rng.gen_range(-1.0..1.0));
            ret_data.push(rng.gen_range(-1.0..1.0));
        }
        let batch = BatchData::new(
            Tensor::from_vec(n, 4, obs_data).unwrap(),
            Tensor::from_vec(n, 2, act_data).unwrap(),
            Tensor::from_vec(n, 1, logp_data).unwrap(),
            Tensor::from_vec(n, 1, adv_data).unwrap(),
            Tensor::from_vec(n, 1, ret_data).unwrap(),
        )
        .unwrap();
        let cfg = default_cfg();
        let (before, pg, vg) = loss_and_grads(&policy, &value, &batch, &cfg).unwrap();

        let descend = |params: &ParameterSet, grads: &GradientSet| {
            let mut out = params.clone();
            for (buf, gbuf) in out.buffers_mut().into_iter().zip(grads.buffers()) {
                for (p, g) in buf.iter_mut().zip(gbuf.iter()) {
                    *p -= 1e-3 * g;
                }
            }
            out
        };
        let policy2 = descend(&policy, &pg);
        let value2 = descend(&value, &vg);
        let (after, _, _) = loss_and_grads(&policy2, &value2, &batch, &cfg).unwrap();
        assert!(
            after.total < before.total,
            "loss went from {} to {}",
            before.total,
            after.total
        );
    }

    #[test]
    fn zero_advantages_produce_zero_policy_gradients() {
        let (policy, value, mut batch) = gradient_check_setup();
        batch.advantages = Tensor::zeros(batch.len(), 1);
        let (_, pg, vg) = loss_and_grads(&policy, &value, &batch, &default_cfg()).unwrap();
        for buf in pg.buffers() {
            assert!(buf.iter().all(|&g| g == 0.0), "policy gradient leaked");
        }
        // The value head still has work to do.
        assert!(vg.l2_norm() > 0.0);
    }

    #[test]
    fn shape_mismatches_are_rejected() {
        let policy = zero_net(2, 1, true);
        let value = zero_net(2, 1, false);
        let batch = BatchData::new(
            Tensor::zeros(3, 4),
            Tensor::zeros(3, 1),
            Tensor::zeros(3, 1),
            Tensor::zeros(3, 1),
            Tensor::zeros(3, 1),
        )
        .unwrap();
        assert!(matches!(
            loss_and_grads(&policy, &value, &batch, &default_cfg()),
            Err(PpoError::Shape(_))
        ));

        assert!(matches!(
            BatchData::new(
                Tensor::zeros(0, 2),
                Tensor::zeros(0, 1),
                Tensor::zeros(0, 1),
                Tensor::zeros(0, 1),
                Tensor::zeros(0, 1),
            ),
            Err(PpoError::Shape(_))
        ));
    }

    #[test]
    fn gather_picks_rows_in_order() {
        let batch = BatchData::new(
            Tensor::from_vec(3, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap(),
            Tensor::from_vec(3, 1, vec![0.1, 0.2, 0.3]).unwrap(),
            Tensor::zeros(3, 1),
            Tensor::zeros(3, 1),
            Tensor::zeros(3, 1),
        )
        .unwrap();
        let sub = batch.gather(&[2, 0]);
        assert_eq!(sub.obs.as_slice(), &[5.0, 6.0, 1.0, 2.0]);
        assert_eq!(sub.actions.as_slice(), &[0.3, 0.1]);
    }
}
