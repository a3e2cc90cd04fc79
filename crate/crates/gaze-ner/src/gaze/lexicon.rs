//! Type-aggregation lexicons: lower-cased word types mapped to their
//! occurrence-averaged gaze features, with thresholds refitted on the
//! aggregated values. Lookup needs no recorded gaze data.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::binning::{apply_bins, fit_bins, BinThresholds, BinnedGazeVector};
use super::{GazeError, RawGazeVector, FEATURE_COUNT, FEATURE_NAMES};
use crate::corpus::Token;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeLexicon {
    pub bin_count: usize,
    pub source_corpora: Vec<String>,
    pub entries: BTreeMap<String, RawGazeVector>,
    pub thresholds: BinThresholds,
}

impl TypeLexicon {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, surface: &str) -> Option<&RawGazeVector> {
        self.entries.get(&surface.to_lowercase())
    }

    /// Fraction of tokens whose lower-cased surface the lexicon covers.
    pub fn coverage(&self, sentences: &[crate::corpus::Sentence]) -> f64 {
        let mut total = 0usize;
        let mut hit = 0usize;
        for sentence in sentences {
            for token in &sentence.tokens {
                total += 1;
                if self.get(&token.surface).is_some() {
                    hit += 1;
                }
            }
        }
        if total == 0 {
            0.0
        } else {
            hit as f64 / total as f64
        }
    }
}

/// Pools every occurrence of each lower-cased type across the supplied
/// corpora and averages per feature slot; unknown slots are skipped, and a
/// slot with no observed value stays unknown. Thresholds are refitted on
/// the aggregated vectors.
pub fn build_type_lexicon(
    corpora: &[(String, Vec<(String, RawGazeVector)>)],
    bins: usize,
) -> Result<TypeLexicon, GazeError> {
    if corpora.is_empty() || corpora.iter().all(|(_, v)| v.is_empty()) {
        return Err(GazeError::EmptyInput);
    }
    let mut sums: BTreeMap<String, ([f64; FEATURE_COUNT], [usize; FEATURE_COUNT])> =
        BTreeMap::new();
    for (_, occurrences) in corpora {
        for (surface, vector) in occurrences {
            let entry = sums
                .entry(surface.to_lowercase())
                .or_insert(([0.0; FEATURE_COUNT], [0; FEATURE_COUNT]));
        for (f, value) in vector.values.iter().enumerate() {
                if let Some(v) = value {
                    entry.0[f] += v;
                    entry.1[f] += 1;
                }
            }
        }
    }
    let entries: BTreeMap<String, RawGazeVector> = sums
        .into_iter()
        .map(|(word, (sum, count))| {
            let mut v = RawGazeVector::empty();
            for f in 0..FEATURE_COUNT {
                if count[f] > 0 {
                    v.values[f] = Some(sum[f] / count[f] as f64);
                }
            }
            (word, v)
        })
        .collect();

    let aggregated: Vec<RawGazeVector> = entries.values().copied().collect();
    let thresholds = fit_bins(&aggregated, bins)?;
    let mut source_corpora: Vec<String> = corpora.iter().map(|(id, _)| id.clone()).collect();
    source_corpora.sort();
    source_corpora.dedup();

    Ok(TypeLexicon {
        bin_count: bins,
        source_corpora,
        entries,
        thresholds,
    })
}

/// Case-insensitive lookup; a miss yields the all-UNKNOWN vector.
pub fn lookup_type_features(token: &Token, lexicon: &TypeLexicon) -> BinnedGazeVector {
    match lexicon.get(&token.surface) {
        Some(vector) => apply_bins(vector, &lexicon.thresholds),
        None => BinnedGazeVector::all_unknown(lexicon.bin_count),
    }
}

const MAGIC: &str = "gaze-lexicon v1";

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => "NA".to_string(),
    }
}

fn parse_opt(s: &str, path: &Path, line: usize) -> Result<Option<f64>, GazeError> {
    if s == "NA" {
        return Ok(None);
    }
    s.parse::<f64>().map(Some).map_err(|_| GazeError::Format {
        path: path.to_path_buf(),
        line,
        message: format!("bad float '{s}'"),
    })
}

/// Serializes the versioned text format. Floats use the shortest exact
/// representation, so write/parse round-trips are bit-exact.
pub fn serialize_lexicon(lexicon: &TypeLexicon) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!("bins\t{}\n", lexicon.bin_count));
    out.push_str(&format!("corpora\t{}\n", lexicon.source_corpora.join("\t")));
    out.push_str(&format!("features\t{}\n", FEATURE_NAMES.join("\t")));
    out.push_str(&format!("types\t{}\n", lexicon.entries.len()));
    for (word, vector) in &lexicon.entries {
        out.push_str(word);
        for v in vector.values {
            out.push('\t');
            out.push_str(&fmt_opt(v));
        }
        out.push('\n');
    }
    out.push_str("thresholds\n");
    for (f, name) in FEATURE_NAMES.iter().enumerate() {
        out.push_str(name);
        for c in &lexicon.thresholds.cuts[f] {
            out.push('\t');
            out.push_str(&format!("{c}"));
        }
        out.push('\n');
    }
    out.push_str("end\n");
    out
}

pub fn write_lexicon(path: &Path, lexicon: &TypeLexicon) -> Result<(), GazeError> {
    fs::write(path, serialize_lexicon(lexicon)).map_err(|source| GazeError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_lexicon(path: &Path) -> Result<TypeLexicon, GazeError> {
    let text = fs::read_to_string(path).map_err(|source| GazeError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_lexicon(&text, path)
}

pub fn parse_lexicon(text: &str, path: &Path) -> Result<TypeLexicon, GazeError> {
    let err = |line: usize, message: String| GazeError::Format {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    let mut next = |expect: &str| -> Result<(usize, String), GazeError> {
        lines
            .next()
            .map(|(i, l)| (i + 1, l.to_string()))
            .ok_or_else(|| err(0, format!("unexpected end of file, expected {expect}")))
    };

    let (line, magic) = next("magic header")?;
    if magic != MAGIC {
        return Err(err(line, format!("expected '{MAGIC}'")));
    }
    let (line, bins_line) = next("bins")?;
    let bin_count: usize = bins_line
        .strip_prefix("bins\t")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| err(line, "bad bins line".into()))?;
    let (line, corpora_line) = next("corpora")?;
    let source_corpora: Vec<String> = corpora_line
        .strip_prefix("corpora")
        .ok_or_else(|| err(line, "bad corpora line".into()))?
        .split('\t')
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect();
    let (line, features_line) = next("features")?;
    let names: Vec<&str> = features_line.split('\t').skip(1).collect();
    if names != FEATURE_NAMES {
        return Err(err(line, "feature-name list mismatch".into()));
    }
    let (line, types_line) = next("types")?;
    let n_types: usize = types_line
        .strip_prefix("types\t")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| err(line, "bad types line".into()))?;

    let mut entries = BTreeMap::new();
    for _ in 0..n_types {
        let (line, row) = next("type row")?;
        let fields: Vec<&str> = row.split('\t').collect();
        if fields.len() != FEATURE_COUNT + 1 {
            return Err(err(line, format!("expected {} columns", FEATURE_COUNT + 1)));
        }
        let mut vector = RawGazeVector::empty();
        for f in 0..FEATURE_COUNT {
            vector.values[f] = parse_opt(fields[f + 1], path, line)?;
        }
        entries.insert(fields[0].to_string(), vector);
    }

    let (line, marker) = next("thresholds")?;
    if marker != "thresholds" {
        return Err(err(line, "expected 'thresholds'".into()));
    }
    let mut cuts = Vec::with_capacity(FEATURE_COUNT);
    for name in FEATURE_NAMES {
        let (line, row) = next("threshold row")?;
        let mut fields = row.split('\t');
        if fields.next() != Some(name) {
            return Err(err(line, format!("expected thresholds for '{name}'")));
        }
        let row_cuts: Result<Vec<f64>, _> = fields
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| err(line, format!("bad float '{s}'")))
            })
            .collect();
        cuts.push(row_cuts?);
    }
    let (line, end) = next("end")?;
    if end != "end" {
        return Err(err(line, "expected 'end'".into()));
    }

    Ok(TypeLexicon {
        bin_count,
        source_corpora,
        entries,
        thresholds: BinThresholds {
            bins: bin_count,
            cuts,
        },
    })
}
