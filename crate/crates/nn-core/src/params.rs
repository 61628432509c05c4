//! Network parameters, their gradients, and Xavier initialization.

use rand::Rng;

use crate::error::{NnError, Result};
use crate::tensor::Tensor;

/// Weights and biases of one dense layer. `weight` is `out x in`, `bias` is
/// `1 x out`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub weight: Tensor,
    pub bias: Tensor,
}

/// All parameters of one multilayer perceptron, plus an optional vector of
/// per-dimension `log_std` values for Gaussian policy heads.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSet {
    pub layers: Vec<LayerParams>,
    pub log_std: Option<Vec<f64>>,
}

impl ParameterSet {
    /// Validate structural invariants: at least one layer, no zero
    /// dimensions, consecutive layers chain, bias shapes match, and every
    /// value is finite. `log_std`, when present, must match the output width.
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(NnError::Config("network needs at least one layer".into()));
        }
        let mut prev_out: Option<usize> = None;
        for (i, layer) in self.layers.iter().enumerate() {
            let (out_dim, in_dim) = layer.weight.shape();
            if out_dim == 0 || in_dim == 0 {
                return Err(NnError::Config(format!(
                    "layer {i} has a zero dimension ({out_dim}x{in_dim})"
                )));
            }
            if layer.bias.shape() != (1, out_dim) {
                return Err(NnError::Shape(format!(
                    "layer {i} bias is {:?}, expected (1, {out_dim})",
                    layer.bias.shape()
                )));
            }
            if let Some(prev) = prev_out {
                if in_dim != prev {
                    return Err(NnError::Shape(format!(
                        "layer {i} expects {in_dim} inputs but layer {} produces {prev}",
                        i - 1
                    )));
                }
            }
            if !layer.weight.is_finite() || !layer.bias.is_finite() {
                return Err(NnError::NonFinite(format!("layer {i} parameters")));
            }
            prev_out = Some(out_dim);
        }
        if let Some(ls) = &self.log_std {
            if ls.len() != self.out_dim() {
                return Err(NnError::Shape(format!(
                    "log_std has {} entries, output width is {}",
                    ls.len(),
                    self.out_dim()
                )));
            }
            if !ls.iter().all(|v| v.is_finite()) {
                return Err(NnError::NonFinite("log_std".into()));
            }
        }
        Ok(())
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].weight.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].weight.rows()
    }

    /// `(in, out)` of every layer, in order.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        self.layers
            .iter()
            .map(|l| (l.weight.cols(), l.weight.rows()))
            .collect()
    }

    /// Total number of scalar parameters, `log_std` included.
    pub fn param_count(&self) -> usize {
        let net: usize = self
            .layers
            .iter()
            .map(|l| l.weight.len() + l.bias.len())
            .sum();
        net + self.log_std.as_ref().map_or(0, Vec::len)
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weight.is_finite() && l.bias.is_finite())
            && self
                .log_std
                .as_ref()
                .is_none_or(|ls| ls.iter().all(|v| v.is_finite()))
    }

    /// Attach a zero-initialized `log_std` head of the output width.
    pub fn with_zero_log_std(mut self) -> Self {
        let n = self.out_dim();
        self.log_std = Some(vec![0.0; n]);
        self
    }

    /// Flat read-only views over every parameter buffer, in a fixed order:
    /// layer 0 weight, layer 0 bias, layer 1 weight, ..., then `log_std`.
    pub fn buffers(&self) -> Vec<&[f64]> {
        let mut out = Vec::with_capacity(self.layers.len() * 2 + 1);
        for layer in &self.layers {
            out.push(layer.weight.as_slice());
            out.push(layer.bias.as_slice());
        }
        if let Some(ls) = &self.log_std {
            out.push(ls.as_slice());
        }
        out
    }

    /// Mutable counterpart of [`buffers`](Self::buffers), same order.
    pub fn buffers_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::with_capacity(self.layers.len() * 2 + 1);
        for layer in &mut self.layers {
            out.push(layer.weight.as_mut_slice());
            out.push(layer.bias.as_mut_slice());
        }
        if let Some(ls) = &mut self.log_std {
            out.push(ls.as_mut_slice());
        }
        out
    }
}

/// Per-parameter gradients (or any other per-parameter accumulator, e.g.
/// Adam moments), shaped exactly like a [`ParameterSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub layers: Vec<LayerParams>,
    pub log_std: Option<Vec<f64>>,
}

impl GradientSet {
    /// All-zero gradients shaped like `params`.
    pub fn zeros_like(params: &ParameterSet) -> Self {
        GradientSet {
            layers: params
                .layers
                .iter()
                .map(|l| LayerParams {
                    weight: Tensor::zeros(l.weight.rows(), l.weight.cols()),
                    bias: Tensor::zeros(1, l.bias.cols()),
                })
                .collect(),
            log_std: params.log_std.as_ref().map(|ls| vec![0.0; ls.len()]),
        }
    }

    pub fn matches_shape(&self, params: &ParameterSet) -> bool {
        self.layers.len() == params.layers.len()
            && self
                .layers
                .iter()
                .zip(params.layers.iter())
                .all(|(g, p)| {
                    g.weight.shape() == p.weight.shape() && g.bias.shape() == p.bias.shape()
                })
            && self.log_std.as_ref().map(Vec::len) == params.log_std.as_ref().map(Vec::len)
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weight.is_finite() && l.bias.is_finite())
            && self
                .log_std
                .as_ref()
                .is_none_or(|ls| ls.iter().all(|v| v.is_finite()))
    }

    /// Flat views, same ordering contract as [`ParameterSet::buffers`].
    pub fn buffers(&self) -> Vec<&[f64]> {
        let mut out = Vec::with_capacity(self.layers.len() * 2 + 1);
        for layer in &self.layers {
            out.push(layer.weight.as_slice());
            out.push(layer.bias.as_slice());
        }
        if let Some(ls) = &self.log_std {
            out.push(ls.as_slice());
        }
        out
    }

    pub fn buffers_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::with_capacity(self.layers.len() * 2 + 1);
        for layer in &mut self.layers {
            out.push(layer.weight.as_mut_slice());
            out.push(layer.bias.as_mut_slice());
        }
        if let Some(ls) = &mut self.log_std {
            out.push(ls.as_mut_slice());
        }
        out
    }

    /// Accumulate `scale * rhs` into `self`.
    pub fn add_scaled(&mut self, rhs: &GradientSet, scale: f64) {
        assert_eq!(self.layers.len(), rhs.layers.len());
        for (a, b) in self.layers.iter_mut().zip(rhs.layers.iter()) {
            a.weight.add_scaled(&b.weight, scale);
            a.bias.add_scaled(&b.bias, scale);
        }
        match (&mut self.log_std, &rhs.log_std) {
            (Some(a), Some(b)) => {
                for (x, y) in a.iter_mut().zip(b.iter()) {
                    *x += scale * y;
                }
            }
            (None, None) => {}
            _ => panic!("add_scaled log_std presence mismatch"),
        }
    }

    /// Euclidean norm over every gradient entry.
    pub fn l2_norm(&self) -> f64 {
        let mut acc = 0.0;
        for buf in self.buffers() {
            for &v in buf {
                acc += v * v;
            }
        }
        acc.sqrt()
    }
}

/// Xavier-uniform initialization for a chain of dense layers.
///
/// `layer_shapes` lists `(in, out)` per layer; consecutive entries must
/// chain. Each weight is drawn from `U[-sqrt(6/(in+out)), +sqrt(6/(in+out))]`
/// (variance `2/(in+out)`), biases start at zero, and no `log_std` head is
/// attached. Draw order is fixed — layers in order, each weight matrix
/// row-major — so a given generator state always produces the same network.
pub fn xavier_init(layer_shapes: &[(usize, usize)], rng: &mut impl Rng) -> Result<ParameterSet> {
    if layer_shapes.is_empty() {
        return Err(NnError::Config("network needs at least one layer".into()));
    }
    for (i, &(in_dim, out_dim)) in layer_shapes.iter().enumerate() {
        if in_dim == 0 || out_dim == 0 {
            return Err(NnError::Config(format!(
                "layer {i} has a zero dimension ({in_dim} -> {out_dim})"
            )));
        }
        if i > 0 && layer_shapes[i - 1].1 != in_dim {
            return Err(NnError::Shape(format!(
                "layer {i} expects {in_dim} inputs but layer {} produces {}",
                i - 1,
                layer_shapes[i - 1].1
            )));
        }
    }

    let layers = layer_shapes
        .iter()
        .map(|&(in_dim, out_dim)| {
            let bound = (6.0 / (in_dim + out_dim) as f64).sqrt();
            let mut weight = Tensor::zeros(out_dim, in_dim);
            for v in weight.as_mut_slice() {
                *v = rng.gen_range(-bound..=bound);
            }
            LayerParams {
                weight,
                bias: Tensor::zeros(1, out_dim),
            }
        })
        .collect();

    let params = ParameterSet {
        layers,
        log_std: None,
    };
    params.validate()?;
    Ok(params)
}
