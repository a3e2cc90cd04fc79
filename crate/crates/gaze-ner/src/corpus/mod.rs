//! Parsing, validation, and serialization of all external data files:
//! labeled token files, fixation-event files, pre-averaged gaze files, and
//! pre-trained word-vector files.
//!
//! Parsing is pure per file; parsed structures are immutable and safe to
//! share across threads.

use std::io;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod align;
pub mod embeddings;
pub mod fixation;
pub mod labels;
pub mod stats;
pub mod token_file;

pub use align::align_split_tokens;
pub use embeddings::{load_embeddings, EmbeddingTable};
pub use fixation::{
    parse_fixation_file, parse_fixation_text, serialize_fixation_file, write_fixation_file,
    FixationEvent,
};
pub use labels::{is_iob_well_formed, repair_iob, EntityClass, Label, LABELS};
pub use stats::{corpus_stats, CorpusStats};
pub use token_file::{
    normalize_digits, parse_token_file, parse_token_text, serialize_token_file, write_token_file,
    ParsedCorpus,
};

/// One labeled token. `normalized` is the surface with digits replaced by
/// `'0'`; `whitespace_group` indexes the whitespace-delimited unit the token
/// came from (split tokens such as `John` / `'s` share a group).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub normalized: String,
    pub label: Label,
    pub whitespace_group: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub corpus_id: String,
    pub sent_id: usize,
    pub tokens: Vec<Token>,
}

impl Sentence {
    /// Number of whitespace-delimited units (always `max group + 1`).
    pub fn group_count(&self) -> usize {
        self.tokens
            .last()
            .map(|t| t.whitespace_group + 1)
            .unwrap_or(0)
    }

    pub fn labels(&self) -> Vec<Label> {
        self.tokens.iter().map(|t| t.label).collect()
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: io::Error,
    },
    #[error("line {line}: unknown label '{label}'")]
    UnknownLabel { line: usize, label: String },
    #[error("line {line}: expected {expected} tab-separated columns, found {found}")]
    ColumnCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: invalid {field} value '{value}'")]
    BadField {
        line: usize,
        field: &'static str,
        value: String,
    },
    #[error("line {line}: whitespace group {group} breaks the contiguous non-decreasing order")]
    BadGroupSequence { line: usize, group: usize },
    #[error("line {line}: duplicate fixation order (reader '{reader}', sentence {sent}, order {order})")]
    DuplicateOrder {
        line: usize,
        reader: String,
        sent: usize,
        order: usize,
    },
    #[error("reader '{reader}', sentence {sent}: fixation orders are not a permutation of 0..{count}")]
    OrderGap {
        reader: String,
        sent: usize,
        count: usize,
    },
    #[error("line {line}: word index {word_index} out of range for sentence {sent} ({groups} units)")]
    WordIndexOutOfRange {
        line: usize,
        sent: usize,
        word_index: usize,
        groups: usize,
    },
    #[error("line {line}: unknown sentence id {sent}")]
    UnknownSentence { line: usize, sent: usize },
    #[error("line {line}: non-positive fixation duration {duration}")]
    NonPositiveDuration { line: usize, duration: f64 },
    #[error("{path}: no valid embedding rows")]
    EmptyEmbeddings { path: PathBuf },
    #[error("sentence {sent}: whitespace group {group} has no gaze vector")]
    MissingGroup { sent: usize, group: usize },
    #[error("{path} line {line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
}
