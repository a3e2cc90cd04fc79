//! The differentiable tagger: a reverse-mode differentiation kernel, LSTM
//! layers, embedding tables, and a linear-chain CRF with exact training loss
//! and Viterbi decoding. 64-bit floats throughout.
//!
//! A model instance is exclusively owned during training; inference over a
//! frozen model is read-only and thread-safe.

use std::path::PathBuf;

use thiserror::Error;

pub mod checkpoint;
pub mod crf;
pub mod lstm;
pub mod model;
pub mod optimizer;
pub mod tape;
pub mod tensor;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, GazeSource};
pub use crf::{crf_nll, viterbi_decode, CrfParams, Path};
pub use model::{token_inputs, GazeConfig, ModelConfig, TaggerModel, TokenInput, Vocabulary};
pub use optimizer::{apply_freeze, sgd_step};
pub use tape::{NodeGrads, NodeId, Tape};
pub use tensor::{Gradients, ParamId, ParamSet, Tensor};

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("invalid model config: {0}")]
    BadConfig(String),
    #[error("{kind} id {id} out of range (max {max})")]
    IdOutOfRange {
        kind: &'static str,
        id: usize,
        max: usize,
    },
    #[error("model uses gaze features but the input has none")]
    MissingGaze,
    #[error("train mode with dropout requires an RNG")]
    MissingRng,
    #[error("cannot encode an empty sentence")]
    EmptySentence,
    #[error("non-finite gradient (training diverged)")]
    NonFiniteGradient,
    #[error("bad checkpoint: {0}")]
    BadCheckpoint(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}
