//! Eye-tracking features: per-reader reading measures, across-reader
//! averaging, context features, quantile binning, and type-aggregation
//! lexicons.
//!
//! All operations are pure functions over immutable inputs; featurization
//! parallelizes per sentence with schedule-independent output.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod binning;
pub mod featurize;
pub mod lexicon;
pub mod measures;

pub use binning::{apply_bins, fit_bins, BinThresholds, BinnedGazeVector};
pub use featurize::{featurize_corpus, featurize_with_lexicon, FeaturizedCorpus};
pub use lexicon::{build_type_lexicon, lookup_type_features, TypeLexicon};
pub use measures::{add_context_features, average_readers, reader_word_measures, ReaderWordMeasures};

/// Number of gaze features per token.
pub const FEATURE_COUNT: usize = 17;

/// Feature names, in canonical column order (basic, early, late, context).
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "n_fixations",
    "fixation_probability",
    "mean_fixation_duration",
    "first_fixation_duration",
    "first_pass_duration",
    "total_fixation_duration",
    "n_refixations",
    "reread_probability",
    "total_regression_from_duration",
    "wm2_fixation_probability",
    "wm1_fixation_probability",
    "wp1_fixation_probability",
    "wp2_fixation_probability",
    "wm2_fixation_duration",
    "wm1_fixation_duration",
    "wp1_fixation_duration",
    "wp2_fixation_duration",
];

/// Indices into a [`RawGazeVector`].
pub mod feature {
    pub const N_FIXATIONS: usize = 0;
    pub const FIXATION_PROBABILITY: usize = 1;
    pub const MEAN_FIXATION_DURATION: usize = 2;
    pub const FIRST_FIXATION_DURATION: usize = 3;
    pub const FIRST_PASS_DURATION: usize = 4;
    pub const TOTAL_FIXATION_DURATION: usize = 5;
    pub const N_REFIXATIONS: usize = 6;
    pub const REREAD_PROBABILITY: usize = 7;
    pub const TOTAL_REGRESSION_FROM_DURATION: usize = 8;
    /// Context slots: fixation probability at w-2, w-1, w+1, w+2.
    pub const CONTEXT_PROB: [usize; 4] = [9, 10, 11, 12];
    /// Context slots: fixation duration at w-2, w-1, w+1, w+2.
    pub const CONTEXT_DUR: [usize; 4] = [13, 14, 15, 16];
}

/// The 17 real-valued gaze features of one token (or one word type).
/// `None` marks a value that does not exist: a context slot past the
/// sentence boundary, or a feature missing from an input file. Unknown
/// slots bin to the UNKNOWN sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawGazeVector {
    pub values: [Option<f64>; FEATURE_COUNT],
}

impl RawGazeVector {
    pub fn empty() -> Self {
        RawGazeVector {
            values: [None; FEATURE_COUNT],
        }
    }

    pub fn get(&self, idx: usize) -> Option<f64> {
        self.values[idx]
    }

    pub fn fixation_probability(&self) -> Option<f64> {
        self.values[feature::FIXATION_PROBABILITY]
    }

    pub fn mean_fixation_duration(&self) -> Option<f64> {
        self.values[feature::MEAN_FIXATION_DURATION]
    }

    pub fn total_fixation_duration(&self) -> Option<f64> {
        self.values[feature::TOTAL_FIXATION_DURATION]
    }
}

#[derive(Debug, Error)]
pub enum GazeError {
    #[error("reader count must be at least 1")]
    NoReaders,
    #[error("bin count must be at least 2, got {0}")]
    BadBinCount(usize),
    #[error("no input vectors")]
    EmptyInput,
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path} line {line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Corpus(#[from] crate::corpus::CorpusError),
}
