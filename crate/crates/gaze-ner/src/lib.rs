//! Named entity recognition augmented with eye-tracking features.
//!
//! The pipeline: raw fixation events -> 17 reading measures per token ->
//! quantile bins -> (optionally) type-aggregated lexicons -> a
//! gaze-embedding-augmented BiLSTM-CRF tagger -> span-level evaluation with
//! cross-validation, cross-corpus, and significance-testing protocols.
//!
//! Modules:
//! - [`corpus`]: file formats, label validation, split-token alignment.
//! - [`gaze`]: reading measures, reader averaging, binning, type lexicons.
//! - [`neural`]: the differentiable tagger and its training kernel.
//! - [`experiments`]: folds, metrics, significance tests, experiment runners,
//!   and a synthetic corpus generator for desk-scale runs.
//! - [`cli`]: the subcommand layer used by the `gaze-ner` binary.
//!
//! See the crate examples for one runnable walkthrough per capability.

pub mod corpus;
pub mod experiments;
pub mod gaze;
pub mod neural;

pub mod cli;
