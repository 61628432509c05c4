//! Checkpoint serialization for parameter sets.
//!
//! Checkpoints are JSON with full-precision floats: serialization uses the
//! shortest decimal that round-trips each `f64`, so save -> load -> save is
//! byte-identical and load recovers every bit. Writes go through a temp file
//! in the destination directory followed by a rename, so a crash can never
//! leave a half-written checkpoint behind.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{NnError, Result};
use crate::params::{LayerParams, ParameterSet};
use crate::tensor::Tensor;

const FORMAT_TAG: &str = "mlp-params-v1";

/// One dense layer as stored on disk.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LayerData {
    /// Row-major `out x in` weight entries.
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

/// A [`ParameterSet`] in serializable form, embeddable in larger checkpoint
/// files.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CheckpointData {
    /// `(in, out)` per layer.
    pub layer_shapes: Vec<(usize, usize)>,
    pub layers: Vec<LayerData>,
    pub log_std: Option<Vec<f64>>,
}

impl CheckpointData {
    pub fn from_params(params: &ParameterSet) -> Self {
        CheckpointData {
            layer_shapes: params.layer_shapes(),
            layers: params
                .layers
                .iter()
                .map(|l| LayerData {
                    weight: l.weight.as_slice().to_vec(),
                    bias: l.bias.as_slice().to_vec(),
                })
                .collect(),
            log_std: params.log_std.clone(),
        }
    }

    /// Rebuild and re-validate the parameter set.
    pub fn into_params(self) -> Result<ParameterSet> {
        if self.layer_shapes.len() != self.layers.len() {
            return Err(NnError::Format(format!(
                "{} layer shapes but {} layer payloads",
                self.layer_shapes.len(),
                self.layers.len()
            )));
        }
        let layers = self
            .layer_shapes
            .iter()
            .zip(self.layers)
            .enumerate()
            .map(|(i, (&(in_dim, out_dim), data))| {
                let weight = Tensor::from_vec(out_dim, in_dim, data.weight).map_err(|_| {
                    NnError::Format(format!("layer {i} weight payload does not fill {out_dim}x{in_dim}"))
                })?;
                let bias = Tensor::from_vec(1, out_dim, data.bias).map_err(|_| {
                    NnError::Format(format!("layer {i} bias payload does not fill 1x{out_dim}"))
                })?;
                Ok(LayerParams { weight, bias })
            })
            .collect::<Result<Vec<_>>>()?;
        let params = ParameterSet {
            layers,
            log_std: self.log_std,
        };
        params.validate()?;
        Ok(params)
    }
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    format: String,
    seed: u64,
    #[serde(flatten)]
    data: CheckpointData,
}

/// Serialize one parameter set (plus the master seed that produced it) as a
/// deterministic JSON byte string.
pub fn checkpoint_bytes(params: &ParameterSet, seed: u64) -> Result<Vec<u8>> {
    params.validate()?;
    let file = CheckpointFile {
        format: FORMAT_TAG.to_string(),
        seed,
        data: CheckpointData::from_params(params),
    };
    let mut bytes = serde_json::to_vec(&file).map_err(|e| NnError::Format(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Write a checkpoint atomically (temp file + rename).
pub fn save_checkpoint(path: &Path, params: &ParameterSet, seed: u64) -> Result<()> {
    let bytes = checkpoint_bytes(params, seed)?;
    write_atomic(path, &bytes)
}

/// Load a checkpoint, recovering the exact parameters and the stored seed.
pub fn load_checkpoint(path: &Path) -> Result<(ParameterSet, u64)> {
    let bytes = fs::read(path)?;
    let file: CheckpointFile =
        serde_json::from_slice(&bytes).map_err(|e| NnError::Format(e.to_string()))?;
    if file.format != FORMAT_TAG {
        return Err(NnError::Format(format!(
            "unsupported checkpoint format '{}'",
            file.format
        )));
    }
    Ok((file.data.into_params()?, file.seed))
}

/// Write `bytes` to `path` via a sibling temp file and an atomic rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        fs::create_dir_all(dir)?;
    }
    let file_name = path
        .file_name()
        .ok_or_else(|| NnError::Config(format!("not a file path: {}", path.display())))?;
    let mut tmp = path.to_path_buf();
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(".tmp");
    tmp.set_file_name(tmp_name);

    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
