//! Reverse-mode automatic differentiation on a flat evaluation tape.
//!
//! Values are appended in evaluation order; each records the primitive that
//! produced it and the ids of its inputs. [`Tape::backward`] walks the tape
//! once in reverse, accumulating adjoints. The primitive set is a closed
//! enum covering exactly what the training losses need, so an "unsupported
//! operation" cannot be expressed at all — there is nothing to error on.
//!
//! Design choices worth knowing:
//! - everything is an `f64` matrix ([`Tensor`]); scalars are 1x1;
//! - gradients flow only into **leaves** (registered parameters), and a
//!   leaf's adjoint is returned indexed by its registration slot;
//! - `min` and `clamp` use one-sided subgradients at kinks (ties go to the
//!   first argument, clamp boundaries count as inside), matching the usual
//!   convention for clipped objectives.

use crate::error::{NnError, Result};
use crate::params::{GradientSet, LayerParams, ParameterSet};
use crate::tensor::Tensor;

/// Handle to a value on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValueId(usize);

#[derive(Debug, Clone)]
enum Op {
    /// Differentiable input (a registered parameter).
    Leaf,
    /// Non-differentiable input (data, targets, stale log-probs, ...).
    Constant,
    MatMul(ValueId, ValueId),
    Transpose(ValueId),
    Add(ValueId, ValueId),
    Sub(ValueId, ValueId),
    Mul(ValueId, ValueId),
    /// matrix + row, the row added to every matrix row.
    AddRowBroadcast(ValueId, ValueId),
    /// 1 x n row repeated to rows x n.
    BroadcastRow(ValueId),
    Tanh(ValueId),
    Exp(ValueId),
    Scale(ValueId, f64),
    AddScalar(ValueId),
    /// Elementwise minimum; ties send the gradient to the first argument.
    Min(ValueId, ValueId),
    /// Elementwise clamp to `[lo, hi]`; gradient 1 inside (boundaries
    /// included), 0 outside.
    Clamp(ValueId, f64, f64),
    /// m x n -> m x 1.
    RowSums(ValueId),
    /// m x n -> 1 x 1 average.
    MeanAll(ValueId),
}

struct Node {
    op: Op,
    value: Tensor,
}

/// Recorded computation supporting one reverse sweep.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
    /// Node index of each leaf, in registration order.
    leaf_nodes: Vec<usize>,
}

/// Adjoints of every leaf after a reverse sweep, indexed by leaf slot.
pub struct LeafGrads {
    grads: Vec<Tensor>,
}

impl LeafGrads {
    pub fn slot(&self, slot: usize) -> &Tensor {
        &self.grads[slot]
    }

    pub fn len(&self) -> usize {
        self.grads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grads.is_empty()
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The forward value of any recorded node.
    pub fn value(&self, id: ValueId) -> &Tensor {
        &self.nodes[id.0].value
    }

    fn push(&mut self, op: Op, value: Tensor) -> ValueId {
        self.nodes.push(Node { op, value });
        ValueId(self.nodes.len() - 1)
    }

    /// Register a differentiable input. Its gradient appears in
    /// [`LeafGrads`] at slot `k` for the `k`-th registered leaf.
    pub fn leaf(&mut self, value: Tensor) -> ValueId {
        let id = self.push(Op::Leaf, value);
        self.leaf_nodes.push(id.0);
        id
    }

    /// Register a non-differentiable input.
    pub fn constant(&mut self, value: Tensor) -> ValueId {
        self.push(Op::Constant, value)
    }

    pub fn matmul(&mut self, a: ValueId, b: ValueId) -> ValueId {
        let value = self.value(a).matmul(self.value(b));
        self.push(Op::MatMul(a, b), value)
    }

    pub fn transpose(&mut self, a: ValueId) -> ValueId {
        let value = self.value(a).transpose();
        self.push(Op::Transpose(a), value)
    }

    pub fn add(&mut self, a: ValueId, b: ValueId) -> ValueId {
        let value = self.value(a).zip_map(self.value(b), |x, y| x + y);
        self.push(Op::Add(a, b), value)
    }

    pub fn sub(&mut self, a: ValueId, b: ValueId) -> ValueId {
        let value = self.value(a).zip_map(self.value(b), |x, y| x - y);
        self.push(Op::Sub(a, b), value)
    }

    pub fn mul(&mut self, a: ValueId, b: ValueId) -> ValueId {
        let value = self.value(a).zip_map(self.value(b), |x, y| x * y);
        self.push(Op::Mul(a, b), value)
    }

    /// Add a 1 x n row vector to every row of an m x n matrix.
    pub fn add_row_broadcast(&mut self, matrix: ValueId, row: ValueId) -> ValueId {
        let m = self.value(matrix);
        let r = self.value(row);
        assert_eq!(r.rows(), 1, "broadcast row must be 1 x n");
        assert_eq!(m.cols(), r.cols(), "broadcast width mismatch");
        let mut value = m.clone();
        for i in 0..value.rows() {
            for j in 0..value.cols() {
                let v = value.get(i, j) + r.get(0, j);
                value.set(i, j, v);
            }
        }
        self.push(Op::AddRowBroadcast(matrix, row), value)
    }

    /// Repeat a 1 x n row `rows` times.
    pub fn broadcast_row(&mut self, row: ValueId, rows: usize) -> ValueId {
        let r = self.value(row);
        assert_eq!(r.rows(), 1, "broadcast source must be 1 x n");
        let mut value = Tensor::zeros(rows, r.cols());
        for i in 0..rows {
            for j in 0..r.cols() {
                value.set(i, j, r.get(0, j));
            }
        }
        self.push(Op::BroadcastRow(row), value)
    }

    pub fn tanh(&mut self, a: ValueId) -> ValueId {
        let value = self.value(a).map(f64::tanh);
        self.push(Op::Tanh(a), value)
    }

    pub fn exp(&mut self, a: ValueId) -> ValueId {
        let value = self.value(a).map(f64::exp);
        self.push(Op::Exp(a), value)
    }

    pub fn scale(&mut self, a: ValueId, c: f64) -> ValueId {
        let value = self.value(a).map(|x| c * x);
        self.push(Op::Scale(a, c), value)
    }

    pub fn add_scalar(&mut self, a: ValueId, c: f64) -> ValueId {
        let value = self.value(a).map(|x| x + c);
        self.push(Op::AddScalar(a), value)
    }

    pub fn min(&mut self, a: ValueId, b: ValueId) -> ValueId {
        let value = self.value(a).zip_map(self.value(b), f64::min);
        self.push(Op::Min(a, b), value)
    }

    pub fn clamp(&mut self, a: ValueId, lo: f64, hi: f64) -> ValueId {
        assert!(lo <= hi, "clamp bounds out of order");
        let value = self.value(a).map(|x| x.clamp(lo, hi));
        self.push(Op::Clamp(a, lo, hi), value)
    }

    pub fn row_sums(&mut self, a: ValueId) -> ValueId {
        let value = self.value(a).row_sums();
        self.push(Op::RowSums(a), value)
    }

    pub fn mean_all(&mut self, a: ValueId) -> ValueId {
        let t = self.value(a);
        let value = Tensor::from_vec(1, 1, vec![t.sum() / t.len() as f64])
            .expect("1x1 tensor");
        self.push(Op::MeanAll(a), value)
    }

    /// Reverse sweep from a scalar root. Returns the adjoint of every leaf;
    /// leaves the root does not depend on get zero gradients.
    pub fn backward(&self, root: ValueId) -> Result<LeafGrads> {
        let root_val = self.value(root);
        if root_val.shape() != (1, 1) {
            return Err(NnError::Shape(format!(
                "backward root must be 1x1, got {:?}",
                root_val.shape()
            )));
        }
        if !root_val.is_finite() {
            return Err(NnError::NonFinite("backward root".into()));
        }

        let mut adjoints: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        adjoints[root.0] = Some(Tensor::full(1, 1, 1.0));

        for idx in (0..=root.0).rev() {
            let Some(g) = adjoints[idx].take() else {
                continue;
            };
            match &self.nodes[idx].op {
                Op::Leaf | Op::Constant => {
                    // Terminal; stash the adjoint back for collection below.
                    adjoints[idx] = Some(g);
                    continue;
                }
                Op::MatMul(a, b) => {
                    let da = g.matmul_transpose_rhs(self.value(*b));
                    let db = self.value(*a).matmul_transpose_lhs(&g);
                    accumulate(&mut adjoints[a.0], &da);
                    accumulate(&mut adjoints[b.0], &db);
                }
                Op::Transpose(a) => {
                    accumulate(&mut adjoints[a.0], &g.transpose());
                }
                Op::Add(a, b) => {
                    accumulate(&mut adjoints[a.0], &g);
                    accumulate(&mut adjoints[b.0], &g);
                }
                Op::Sub(a, b) => {
                    accumulate(&mut adjoints[a.0], &g);
                    accumulate_scaled(&mut adjoints[b.0], &g, -1.0);
                }
                Op::Mul(a, b) => {
                    let da = g.zip_map(self.value(*b), |gv, bv| gv * bv);
                    let db = g.zip_map(self.value(*a), |gv, av| gv * av);
                    accumulate(&mut adjoints[a.0], &da);
                    accumulate(&mut adjoints[b.0], &db);
                }
                Op::AddRowBroadcast(m, r) => {
                    accumulate(&mut adjoints[m.0], &g);
                    accumulate(&mut adjoints[r.0], &g.column_sums());
                }
                Op::BroadcastRow(r) => {
                    accumulate(&mut adjoints[r.0], &g.column_sums());
                }
                Op::Tanh(a) => {
                    let y = &self.nodes[idx].value;
                    let da = g.zip_map(y, |gv, yv| gv * (1.0 - yv * yv));
                    accumulate(&mut adjoints[a.0], &da);
                }
                Op::Exp(a) => {
                    let y = &self.nodes[idx].value;
                    let da = g.zip_map(y, |gv, yv| gv * yv);
                    accumulate(&mut adjoints[a.0], &da);
                }
                Op::Scale(a, c) => {
                    accumulate_scaled(&mut adjoints[a.0], &g, *c);
                }
                Op::AddScalar(a) => {
                    accumulate(&mut adjoints[a.0], &g);
                }
                Op::Min(a, b) => {
                    let va = self.value(*a);
                    let vb = self.value(*b);
                    let da = g.zip_map(va, |gv, _| gv).zip_map(
                        &va.zip_map(vb, |x, y| if x <= y { 1.0 } else { 0.0 }),
                        |gv, mask| gv * mask,
                    );
                    let db = g.zip_map(
                        &va.zip_map(vb, |x, y| if x <= y { 0.0 } else { 1.0 }),
                        |gv, mask| gv * mask,
                    );
                    accumulate(&mut adjoints[a.0], &da);
                    accumulate(&mut adjoints[b.0], &db);
                }
                Op::Clamp(a, lo, hi) => {
                    let va = self.value(*a);
                    let da = g.zip_map(va, |gv, x| if x >= *lo && x <= *hi { gv } else { 0.0 });
                    accumulate(&mut adjoints[a.0], &da);
                }
                Op::RowSums(a) => {
                    let src = self.value(*a);
                    let mut da = Tensor::zeros(src.rows(), src.cols());
                    for i in 0..src.rows() {
                        for j in 0..src.cols() {
                            da.set(i, j, g.get(i, 0));
                        }
                    }
                    accumulate(&mut adjoints[a.0], &da);
                }
                Op::MeanAll(a) => {
                    let src = self.value(*a);
                    let gv = g.get(0, 0) / src.len() as f64;
                    let da = Tensor::full(src.rows(), src.cols(), gv);
                    accumulate(&mut adjoints[a.0], &da);
                }
            }
        }

        let grads = self
            .leaf_nodes
            .iter()
            .map(|&node_idx| {
                adjoints[node_idx].take().unwrap_or_else(|| {
                    let v = &self.nodes[node_idx].value;
                    Tensor::zeros(v.rows(), v.cols())
                })
            })
            .collect();
        Ok(LeafGrads { grads })
    }
}

fn accumulate(slot: &mut Option<Tensor>, contribution: &Tensor) {
    match slot {
        Some(existing) => existing.add_scaled(contribution, 1.0),
        None => *slot = Some(contribution.clone()),
    }
}

fn accumulate_scaled(slot: &mut Option<Tensor>, contribution: &Tensor, scale: f64) {
    match slot {
        Some(existing) => existing.add_scaled(contribution, scale),
        None => *slot = Some(contribution.map(|v| scale * v)),
    }
}

/// A [`ParameterSet`] registered on a tape: leaf ids plus the slots needed to
/// pull its gradients back out.
pub struct TapeNet {
    layer_ids: Vec<(ValueId, ValueId)>,
    layer_slots: Vec<(usize, usize)>,
    pub log_std_id: Option<ValueId>,
    log_std_slot: Option<usize>,
    n_layers: usize,
}

/// Register every parameter of `params` as tape leaves.
pub fn register_net(tape: &mut Tape, params: &ParameterSet) -> TapeNet {
    let mut layer_ids = Vec::with_capacity(params.layers.len());
    let mut layer_slots = Vec::with_capacity(params.layers.len());
    for layer in &params.layers {
        let w_slot = tape.leaf_nodes.len();
        let w = tape.leaf(layer.weight.clone());
        let b_slot = tape.leaf_nodes.len();
        let b = tape.leaf(layer.bias.clone());
        layer_ids.push((w, b));
        layer_slots.push((w_slot, b_slot));
    }
    let (log_std_id, log_std_slot) = match &params.log_std {
        Some(ls) => {
            let slot = tape.leaf_nodes.len();
            let id = tape.leaf(Tensor::row(ls));
            (Some(id), Some(slot))
        }
        None => (None, None),
    };
    TapeNet {
        layer_ids,
        layer_slots,
        log_std_id,
        log_std_slot,
        n_layers: params.layers.len(),
    }
}

/// Taped forward pass of the tanh MLP over a batch: `input` is B x in, the
/// result is B x out. Mirrors [`crate::mlp::mlp_forward`] exactly.
pub fn net_forward(tape: &mut Tape, net: &TapeNet, input: ValueId) -> ValueId {
    let mut h = input;
    for (li, &(w, b)) in net.layer_ids.iter().enumerate() {
        let wt = tape.transpose(w);
        let z = tape.matmul(h, wt);
        let z = tape.add_row_broadcast(z, b);
        h = if li + 1 < net.n_layers { tape.tanh(z) } else { z };
    }
    h
}

impl TapeNet {
    /// Collect this network's gradients out of a finished reverse sweep.
    pub fn extract_grads(&self, leaf_grads: &LeafGrads) -> GradientSet {
        let layers = self
            .layer_slots
            .iter()
            .map(|&(w_slot, b_slot)| LayerParams {
                weight: leaf_grads.slot(w_slot).clone(),
                bias: leaf_grads.slot(b_slot).clone(),
            })
            .collect();
        let log_std = self
            .log_std_slot
            .map(|slot| leaf_grads.slot(slot).as_slice().to_vec());
        GradientSet { layers, log_std }
    }
}
