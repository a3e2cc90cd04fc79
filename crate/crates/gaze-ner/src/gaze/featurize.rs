//! End-to-end featurization: fixation events (or pre-averaged measures, or a
//! type lexicon) to per-token binned gaze vectors, plus the featurized-corpus
//! and pre-averaged file formats.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::binning::{apply_bins, fit_bins, BinThresholds, BinnedGazeVector};
use super::lexicon::{lookup_type_features, TypeLexicon};
use super::measures::{add_context_features, average_readers, reader_word_measures};
use super::{GazeError, RawGazeVector, FEATURE_COUNT, FEATURE_NAMES};
use crate::corpus::{align_split_tokens, parse_token_text, FixationEvent, Sentence};

/// A corpus with per-token raw and binned gaze vectors, and the thresholds
/// that produced the bins.
#[derive(Debug, Clone)]
pub struct FeaturizedCorpus {
    pub corpus_id: String,
    pub sentences: Vec<Sentence>,
    /// Sentence-major raw vectors (post split-token alignment).
    pub raw: Vec<Vec<RawGazeVector>>,
    pub bins: Vec<Vec<BinnedGazeVector>>,
    pub thresholds: BinThresholds,
    pub bin_count: usize,
}

impl FeaturizedCorpus {
    /// Occurrence list for lexicon building: every (surface, raw vector) pair.
    pub fn occurrences(&self) -> Vec<(String, RawGazeVector)> {
        let mut out = Vec::new();
        for (sentence, raws) in self.sentences.iter().zip(&self.raw) {
            for (token, raw) in sentence.tokens.iter().zip(raws) {
                out.push((token.surface.clone(), *raw));
            }
        }
        out
    }

    /// Gaze summaries for corpus statistics, sentence-major.
    pub fn gaze_summaries(&self) -> Vec<crate::corpus::stats::TokenGazeSummary> {
        self.raw
            .iter()
            .flatten()
            .map(|v| crate::corpus::stats::TokenGazeSummary {
                fixation_probability: v.fixation_probability().unwrap_or(0.0),
                mean_fixation_duration: v.mean_fixation_duration().unwrap_or(0.0),
                total_fixation_duration: v.total_fixation_duration().unwrap_or(0.0),
            })
            .collect()
    }
}

/// Word-local vectors per whitespace group for every sentence, averaged over
/// the corpus-wide reader set, with context slots filled.
pub fn group_vectors(
    sentences: &[Sentence],
    events: &[FixationEvent],
) -> Result<HashMap<usize, Vec<RawGazeVector>>, GazeError> {
    let readers: BTreeSet<&str> = events.iter().map(|e| e.reader_id.as_str()).collect();
    let reader_count = readers.len().max(1);

    // (sent, reader) -> chronological (word_index, duration)
    let mut sequences: BTreeMap<(usize, &str), Vec<(usize, usize, f64)>> = BTreeMap::new();
    for event in events {
        sequences
            .entry((event.sent_id, event.reader_id.as_str()))
            .or_default()
            .push((event.order, event.word_index, event.duration_ms));
    }
    for seq in sequences.values_mut() {
        seq.sort_unstable_by_key(|&(order, _, _)| order);
    }

    let mut out = HashMap::new();
    for sentence in sentences {
        let n_groups = sentence.group_count();
        let mut per_reader: Vec<Vec<(usize, f64)>> = Vec::new();
        for reader in &readers {
            if let Some(seq) = sequences.get(&(sentence.sent_id, reader)) {
                per_reader.push(seq.iter().map(|&(_, w, d)| (w, d)).collect());
            }
        }
        let mut vectors: Vec<RawGazeVector> = (0..n_groups)
            .map(|group| {
                let records: Vec<_> = per_reader
                    .iter()
                    .map(|seq| reader_word_measures(seq, group))
                    .collect();
                average_readers(&records, reader_count)
            })
            .collect::<Result<_, _>>()?;
        add_context_features(&mut vectors);
        out.insert(sentence.sent_id, vectors);
    }
    Ok(out)
}

/// Full token-level pipeline from raw fixation events: measures, reader
/// averaging, context features, split-token alignment, quantile fit, binning.
pub fn featurize_corpus(
    corpus_id: &str,
    sentences: &[Sentence],
    events: &[FixationEvent],
    bin_count: usize,
) -> Result<FeaturizedCorpus, GazeError> {
    let groups = group_vectors(sentences, events)?;
    let mut raw = Vec::with_capacity(sentences.len());
    for sentence in sentences {
        let per_group: HashMap<usize, RawGazeVector> = groups[&sentence.sent_id]
            .iter()
            .enumerate()
            .map(|(g, v)| (g, *v))
            .collect();
        raw.push(align_split_tokens(sentence, &per_group)?);
    }
    bin_featurized(corpus_id, sentences, raw, bin_count)
}

/// Featurization from a pre-averaged gaze file: rows carry the 17 features
/// per whitespace group directly.
pub fn featurize_pre_averaged(
    corpus_id: &str,
    sentences: &[Sentence],
    rows: &[PreAveragedRow],
    bin_count: usize,
) -> Result<FeaturizedCorpus, GazeError> {
    let mut by_sentence: HashMap<usize, HashMap<usize, RawGazeVector>> = HashMap::new();
    for row in rows {
        by_sentence
            .entry(row.sent_id)
            .or_default()
            .insert(row.word_index, row.vector);
    }
    let empty = HashMap::new();
    let mut raw = Vec::with_capacity(sentences.len());
    for sentence in sentences {
        let per_group = by_sentence.get(&sentence.sent_id).unwrap_or(&empty);
        raw.push(align_split_tokens(sentence, per_group)?);
    }
    bin_featurized(corpus_id, sentences, raw, bin_count)
}

fn bin_featurized(
    corpus_id: &str,
    sentences: &[Sentence],
    raw: Vec<Vec<RawGazeVector>>,
    bin_count: usize,
) -> Result<FeaturizedCorpus, GazeError> {
    let all: Vec<RawGazeVector> = raw.iter().flatten().copied().collect();
    let thresholds = fit_bins(&all, bin_count)?;
    let bins = raw
        .iter()
        .map(|vs| vs.iter().map(|v| apply_bins(v, &thresholds)).collect())
        .collect();
    Ok(FeaturizedCorpus {
        corpus_id: corpus_id.to_string(),
        sentences: sentences.to_vec(),
        raw,
        bins,
        thresholds,
        bin_count,
    })
}

/// Featurization without any recorded gaze: every token is looked up in the
/// lexicon; misses become all-UNKNOWN vectors.
pub fn featurize_with_lexicon(
    corpus_id: &str,
    sentences: &[Sentence],
    lexicon: &TypeLexicon,
) -> FeaturizedCorpus {
    let mut raw = Vec::with_capacity(sentences.len());
    let mut bins = Vec::with_capacity(sentences.len());
    for sentence in sentences {
        let mut sentence_raw = Vec::with_capacity(sentence.tokens.len());
        let mut sentence_bins = Vec::with_capacity(sentence.tokens.len());
        for token in &sentence.tokens {
            sentence_raw.push(
                lexicon
                    .get(&token.surface)
                    .copied()
                    .unwrap_or_else(RawGazeVector::empty),
            );
            sentence_bins.push(lookup_type_features(token, lexicon));
        }
        raw.push(sentence_raw);
        bins.push(sentence_bins);
    }
    FeaturizedCorpus {
        corpus_id: corpus_id.to_string(),
        sentences: sentences.to_vec(),
        raw,
        bins,
        thresholds: lexicon.thresholds.clone(),
        bin_count: lexicon.bin_count,
    }
}

/// One row of a pre-averaged gaze file.
#[derive(Debug, Clone, PartialEq)]
pub struct PreAveragedRow {
    pub sent_id: usize,
    pub word_index: usize,
    pub vector: RawGazeVector,
}

pub fn read_pre_averaged(path: &Path) -> Result<Vec<PreAveragedRow>, GazeError> {
    let text = fs::read_to_string(path).map_err(|source| GazeError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_pre_averaged(&text, path)
}

pub fn parse_pre_averaged(text: &str, path: &Path) -> Result<Vec<PreAveragedRow>, GazeError> {
    let err = |line: usize, message: String| GazeError::Format {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| err(1, "empty file".to_string()))?;
    let expected = format!("sent_id,word_index,{}", FEATURE_NAMES.join(","));
    if header != expected {
        return Err(err(1, format!("bad header, expected '{expected}'")));
    }
    let mut rows = Vec::new();
    for (i, row) in lines {
        let line = i + 1;
        if row.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != FEATURE_COUNT + 2 {
            return Err(err(line, format!("expected {} columns", FEATURE_COUNT + 2)));
        }
        let sent_id = fields[0]
            .parse()
            .map_err(|_| err(line, format!("bad sent_id '{}'", fields[0])))?;
        let word_index = fields[1]
            .parse()
            .map_err(|_| err(line, format!("bad word_index '{}'", fields[1])))?;
        let mut vector = RawGazeVector::empty();
        for f in 0..FEATURE_COUNT {
            let field = fields[f + 2];
            vector.values[f] = if field == "NA" {
                None
            } else {
                Some(
                    field
                        .parse::<f64>()
                        .map_err(|_| err(line, format!("bad float '{field}'")))?,
                )
            };
        }
        rows.push(PreAveragedRow {
            sent_id,
            word_index,
            vector,
        });
    }
    Ok(rows)
}

pub fn serialize_pre_averaged(rows: &[PreAveragedRow]) -> String {
    let mut out = format!("sent_id,word_index,{}\n", FEATURE_NAMES.join(","));
    for row in rows {
        write!(out, "{},{}", row.sent_id, row.word_index).unwrap();
        for v in row.vector.values {
            match v {
                Some(x) => write!(out, ",{x}").unwrap(),
                None => out.push_str(",NA"),
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_pre_averaged(path: &Path, rows: &[PreAveragedRow]) -> Result<(), GazeError> {
    fs::write(path, serialize_pre_averaged(rows)).map_err(|source| GazeError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Serializes a featurized corpus: token-file columns plus the 17 bin
/// indices, with the bin count recorded in a header comment.
pub fn serialize_featurized(corpus: &FeaturizedCorpus) -> String {
    let mut out = format!("# gaze-featurized v1 bins={}\n", corpus.bin_count);
    for (i, (sentence, bins)) in corpus.sentences.iter().zip(&corpus.bins).enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for (token, binned) in sentence.tokens.iter().zip(bins) {
            write!(
                out,
                "{}\t{}\t{}",
                token.surface, token.whitespace_group, token.label
            )
            .unwrap();
            for b in binned.bins {
                write!(out, "\t{b}").unwrap();
            }
            out.push('\n');
        }
    }
    out
}

pub fn write_featurized(path: &Path, corpus: &FeaturizedCorpus) -> Result<(), GazeError> {
    fs::write(path, serialize_featurized(corpus)).map_err(|source| GazeError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// A featurized corpus read back from disk (bins only; raw values are not
/// stored in this format).
#[derive(Debug, Clone)]
pub struct FeaturizedFile {
    pub sentences: Vec<Sentence>,
    pub bins: Vec<Vec<BinnedGazeVector>>,
    pub bin_count: usize,
}

pub fn read_featurized(path: &Path, corpus_id: &str) -> Result<FeaturizedFile, GazeError> {
    let text = fs::read_to_string(path).map_err(|source| GazeError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_featurized(&text, corpus_id, path)
}

pub fn parse_featurized(
    text: &str,
    corpus_id: &str,
    path: &Path,
) -> Result<FeaturizedFile, GazeError> {
    let err = |line: usize, message: String| GazeError::Format {
        path: path.to_path_buf(),
        line,
        message,
    };
    let header = text
        .lines()
        .next()
        .ok_or_else(|| err(1, "empty file".into()))?;
    let bin_count: usize = header
        .strip_prefix("# gaze-featurized v1 bins=")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| err(1, "missing '# gaze-featurized v1 bins=' header".into()))?;

    // Separate the token columns from the bin columns, then reuse the token
    // file parser so IOB validation stays in one place.
    let mut token_text = String::new();
    let mut bin_rows: Vec<Option<BinnedGazeVector>> = Vec::new();
    for (i, row) in text.lines().enumerate().skip(1) {
        let line = i + 1;
        if row.starts_with('#') {
            continue;
        }
        if row.trim().is_empty() {
            token_text.push('\n');
            bin_rows.push(None);
            continue;
        }
        let fields: Vec<&str> = row.split('\t').collect();
        if fields.len() != 3 + FEATURE_COUNT {
            return Err(err(line, format!("expected {} columns", 3 + FEATURE_COUNT)));
        }
        token_text.push_str(&fields[..3].join("\t"));
        token_text.push('\n');
        let mut bins = [0usize; FEATURE_COUNT];
        for f in 0..FEATURE_COUNT {
            bins[f] = fields[3 + f]
                .parse()
                .map_err(|_| err(line, format!("bad bin index '{}'", fields[3 + f])))?;
            if bins[f] > bin_count {
                return Err(err(line, format!("bin index {} exceeds {}", bins[f], bin_count)));
            }
        }
        bin_rows.push(Some(BinnedGazeVector { bins }));
    }

    let parsed = parse_token_text(&token_text, corpus_id)?;
    let mut bins: Vec<Vec<BinnedGazeVector>> = Vec::new();
    let mut current = Vec::new();
    for row in bin_rows {
        match row {
            Some(b) => current.push(b),
            None => {
                if !current.is_empty() {
                    bins.push(std::mem::take(&mut current));
                }
            }
        }
    }
    if !current.is_empty() {
        bins.push(current);
    }
    debug_assert_eq!(bins.len(), parsed.sentences.len());
    Ok(FeaturizedFile {
        sentences: parsed.sentences,
        bins,
        bin_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_fixation_text;
    use crate::gaze::feature;

    fn corpus() -> (Vec<Sentence>, Vec<FixationEvent>) {
        let sentences = parse_token_text("John\t0\tB-PER\n's\t0\tO\ndog\t1\tO\n", "t")
            .unwrap()
            .sentences;
        let fix = "reader_id,sent_id,word_index,order,duration_ms\n\
                   r1,0,0,0,200\nr1,0,1,1,150\nr1,0,0,2,100\n\
                   r2,0,1,0,120\n";
        let events = parse_fixation_text(fix, &sentences).unwrap();
        (sentences, events)
    }

    #[test]
    fn split_tokens_share_vectors_and_bins() {
        let (sentences, events) = corpus();
        let feat = featurize_corpus("t", &sentences, &events, 4).unwrap();
        assert_eq!(feat.raw[0].len(), 3);
        assert_eq!(feat.raw[0][0], feat.raw[0][1]);
        assert_eq!(feat.bins[0][0], feat.bins[0][1]);
    }

    #[test]
    fn group_features_average_over_all_readers() {
        let (sentences, events) = corpus();
        let groups = group_vectors(&sentences, &events).unwrap();
        let g0 = &groups[&0][0];
        // r1 fixated group 0 twice (300ms total), r2 never: prob = 1/2.
        assert_eq!(g0.values[feature::FIXATION_PROBABILITY], Some(0.5));
        assert_eq!(g0.values[feature::TOTAL_FIXATION_DURATION], Some(300.0));
        let g1 = &groups[&0][1];
        // both readers fixated group 1 once
        assert_eq!(g1.values[feature::FIXATION_PROBABILITY], Some(1.0));
        assert_eq!(g1.values[feature::TOTAL_FIXATION_DURATION], Some(135.0));
    }

    #[test]
    fn featurized_file_round_trip() {
        let (sentences, events) = corpus();
        let feat = featurize_corpus("t", &sentences, &events, 4).unwrap();
        let text = serialize_featurized(&feat);
        let parsed = parse_featurized(&text, "t", Path::new("mem")).unwrap();
        assert_eq!(parsed.bin_count, 4);
        assert_eq!(parsed.sentences, feat.sentences);
        assert_eq!(parsed.bins, feat.bins);
    }

    #[test]
    fn pre_averaged_round_trip_with_na() {
        let mut vector = RawGazeVector::empty();
        vector.values[feature::N_FIXATIONS] = Some(1.5);
        vector.values[feature::FIXATION_PROBABILITY] = Some(0.1 + 0.2);
        let rows = vec![PreAveragedRow {
            sent_id: 0,
            word_index: 0,
            vector,
        }];
        let text = serialize_pre_averaged(&rows);
        let parsed = parse_pre_averaged(&text, Path::new("mem")).unwrap();
        assert_eq!(parsed, rows);
        assert_eq!(serialize_pre_averaged(&parsed), text);
    }

    #[test]
    fn lexicon_featurization_handles_misses() {
        let (sentences, events) = corpus();
        let feat = featurize_corpus("t", &sentences, &events, 4).unwrap();
        let lexicon = crate::gaze::build_type_lexicon(
            &[("t".to_string(), feat.occurrences())],
            4,
        )
        .unwrap();
        let new_sentences = parse_token_text("JOHN\t0\tO\nunseen\t1\tO\n", "u")
            .unwrap()
            .sentences;
        let featurized = featurize_with_lexicon("u", &new_sentences, &lexicon);
        assert!(featurized.bins[0][0].bins[feature::N_FIXATIONS] < 4);
        assert_eq!(featurized.bins[0][1], BinnedGazeVector::all_unknown(4));
    }
}
