//! Versioned model checkpoints: config, vocabularies, every parameter
//! tensor, and the gaze featurization the model was trained with. A
//! checkpoint is self-sufficient for tagging new text.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{ModelConfig, TaggerModel, Vocabulary};
use super::tensor::Tensor;
use super::NeuralError;
use crate::gaze::{BinThresholds, TypeLexicon};

pub const CHECKPOINT_VERSION: u32 = 1;

/// What the tagger needs to featurize unseen text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GazeSource {
    /// Baseline: no gaze input.
    None,
    /// Token-level features: new text must come with fixation data, binned
    /// with these thresholds.
    TokenThresholds(BinThresholds),
    /// Type-level features: tokens are looked up in the lexicon, so no
    /// recorded gaze data is required at prediction time.
    Lexicon(TypeLexicon),
}

#[derive(Debug, Serialize, Deserialize)]
struct NamedTensor {
    name: String,
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub config: ModelConfig,
    pub vocab: Vocabulary,
    pub gaze_source: GazeSource,
    params: Vec<NamedTensor>,
}

impl Checkpoint {
    pub fn from_model(model: &TaggerModel, gaze_source: GazeSource) -> Self {
        let params = model
            .params
            .ids()
            .map(|id| {
                let t = model.params.get(id);
                NamedTensor {
                    name: model.params.name(id).to_string(),
                    rows: t.rows,
                    cols: t.cols,
                    data: t.data.clone(),
                }
            })
            .collect();
        Checkpoint {
            version: CHECKPOINT_VERSION,
            config: model.config.clone(),
            vocab: model.vocab.clone(),
            gaze_source,
            params,
        }
    }

    pub fn into_model(self) -> Result<(TaggerModel, GazeSource), NeuralError> {
        if self.version != CHECKPOINT_VERSION {
            return Err(NeuralError::BadCheckpoint(format!(
                "unsupported checkpoint version {}",
                self.version
            )));
        }
        let mut vocab = self.vocab;
        vocab.reindex();
        let tensors = self
            .params
            .into_iter()
            .map(|t| {
                (
                    t.name,
                    Tensor {
                        rows: t.rows,
                        cols: t.cols,
                        data: t.data,
                    },
                )
            })
            .collect();
        let model = TaggerModel::from_tensors(self.config, vocab, tensors)?;
        Ok((model, self.gaze_source))
    }
}

pub fn save_checkpoint(
    path: &Path,
    model: &TaggerModel,
    gaze_source: GazeSource,
) -> Result<(), NeuralError> {
    let checkpoint = Checkpoint::from_model(model, gaze_source);
    let json = serde_json::to_string(&checkpoint).map_err(|e| {
        NeuralError::BadCheckpoint(format!("serialization failed: {e}"))
    })?;
    fs::write(path, json).map_err(|e| NeuralError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn load_checkpoint(path: &Path) -> Result<(TaggerModel, GazeSource), NeuralError> {
    let json = fs::read_to_string(path).map_err(|e| NeuralError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let checkpoint: Checkpoint = serde_json::from_str(&json)
        .map_err(|e| NeuralError::BadCheckpoint(format!("parse failed: {e}")))?;
    checkpoint.into_model()
}
