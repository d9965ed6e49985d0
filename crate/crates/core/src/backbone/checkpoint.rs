//! JSON parameter checkpoints.
//!
//! ```json
//! {"format":"clnode-params/1","kind":"gcn","shapes":[[F,H],[H,C]],"weights":[[...],[...]]}
//! ```
//!
//! Each entry of `weights` is one matrix flattened row-major; `shapes` gives
//! its `[rows, cols]`. Optimizer moments are not stored.

use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{BackboneKind, ModelParams};
use crate::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "clnode-params/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub kind: BackboneKind,
    pub shapes: Vec<[usize; 2]>,
    pub weights: Vec<Vec<f64>>,
}

impl Checkpoint {
    pub fn from_params(kind: BackboneKind, params: &ModelParams) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.to_string(),
            kind,
            shapes: params
                .weights
                .iter()
                .map(|w| [w.nrows(), w.ncols()])
                .collect(),
            weights: params
                .weights
                .iter()
                .map(|w| w.iter().copied().collect())
                .collect(),
        }
    }

    pub fn into_params(self) -> Result<ModelParams> {
        if self.format != CHECKPOINT_FORMAT {
            return Err(Error::invalid(format!(
                "unknown checkpoint format {:?}",
                self.format
            )));
        }
        if self.shapes.len() != self.weights.len() {
            return Err(Error::invalid(
                "checkpoint has mismatched shape and weight counts",
            ));
        }
        let weights = self
            .shapes
            .into_iter()
            .zip(self.weights)
            .map(|([r, c], data)| {
                Array2::from_shape_vec((r, c), data).map_err(|_| {
                    Error::invalid(format!("weight data does not fill a {r}x{c} matrix"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ModelParams::from_weights(weights))
    }
}

pub fn save_checkpoint(
    path: impl AsRef<Path>,
    kind: BackboneKind,
    params: &ModelParams,
) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string(&Checkpoint::from_params(kind, params))?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(BackboneKind, ModelParams)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let ckpt: Checkpoint = serde_json::from_str(&text)?;
    let kind = ckpt.kind;
    Ok((kind, ckpt.into_params()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backbone::{init_params, BackboneConfig};
    use crate::rng::{self, Stream};

    #[test]
    fn weights_survive_a_file_round_trip_bit_exactly() {
        let cfg = BackboneConfig::gcn();
        let params = init_params(&cfg, 5, 3, &mut rng::stream(4, Stream::Model));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("params.json");
        save_checkpoint(&path, cfg.kind, &params).unwrap();
        let (kind, loaded) = load_checkpoint(&path).unwrap();
        assert_eq!(kind, BackboneKind::Gcn);
        assert_eq!(loaded.weights, params.weights);
    }

    #[test]
    fn rejects_bad_shapes() {
        let ckpt = Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            kind: BackboneKind::Sgc,
            shapes: vec![[2, 2]],
            weights: vec![vec![1.0, 2.0, 3.0]],
        };
        assert!(ckpt.into_params().is_err());
    }
}
