//! Fixation-event files: CSV with header
//! `reader_id,sent_id,word_index,order,duration_ms`.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CorpusError, Sentence};

/// One fixation by one reader on one whitespace-delimited unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixationEvent {
    pub reader_id: String,
    pub sent_id: usize,
    /// Index into the sentence's whitespace-delimited units.
    pub word_index: usize,
    /// Position in the reader's chronological fixation sequence for the sentence.
    pub order: usize,
    pub duration_ms: f64,
}

/// Parses and validates fixation events against already-loaded sentences.
///
/// Validation enforces: known sentence ids, in-range word indices, positive
/// durations, and per (reader, sentence) order values forming a permutation
/// of `0..k`.
pub fn parse_fixation_file(
    path: &Path,
    sentences: &[Sentence],
) -> Result<Vec<FixationEvent>, CorpusError> {
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_fixation_text(&text, sentences)
}

pub fn parse_fixation_text(
    text: &str,
    sentences: &[Sentence],
) -> Result<Vec<FixationEvent>, CorpusError> {
    let group_counts: HashMap<usize, usize> = sentences
        .iter()
        .map(|s| (s.sent_id, s.group_count()))
        .collect();

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let mut events: Vec<FixationEvent> = Vec::new();
    // (reader, sent) -> orders seen, for permutation validation
    let mut orders: HashMap<(String, usize), Vec<usize>> = HashMap::new();

    for (i, record) in reader.deserialize::<FixationEvent>().enumerate() {
        let line = i + 2; // header is line 1
        let event: FixationEvent = record.map_err(|e| CorpusError::Format {
            path: "<fixations>".into(),
            line,
            message: e.to_string(),
        })?;
        let groups = *group_counts
            .get(&event.sent_id)
            .ok_or(CorpusError::UnknownSentence {
                line,
                sent: event.sent_id,
            })?;
        if event.word_index >= groups {
            return Err(CorpusError::WordIndexOutOfRange {
                line,
                sent: event.sent_id,
                word_index: event.word_index,
                groups,
            });
        }
        if !(event.duration_ms > 0.0) {
            return Err(CorpusError::NonPositiveDuration {
                line,
                duration: event.duration_ms,
            });
        }
        let seen = orders
            .entry((event.reader_id.clone(), event.sent_id))
            .or_default();
        if seen.contains(&event.order) {
            return Err(CorpusError::DuplicateOrder {
                line,
                reader: event.reader_id.clone(),
                sent: event.sent_id,
                order: event.order,
            });
        }
        seen.push(event.order);
        events.push(event);
    }

    for ((reader_id, sent), mut seen) in orders {
        seen.sort_unstable();
        if seen.iter().enumerate().any(|(i, &o)| i != o) {
            return Err(CorpusError::OrderGap {
                reader: reader_id,
                sent,
                count: seen.len(),
            });
        }
    }

    Ok(events)
}

/// Canonical CSV serialization with the spec header, in input order.
pub fn serialize_fixation_file(events: &[FixationEvent]) -> String {
    let mut out = String::from("reader_id,sent_id,word_index,order,duration_ms\n");
    for e in events {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            e.reader_id, e.sent_id, e.word_index, e.order, e.duration_ms
        ));
    }
    out
}

pub fn write_fixation_file(path: &Path, events: &[FixationEvent]) -> Result<(), CorpusError> {
    fs::write(path, serialize_fixation_file(events)).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_token_text;

    fn sentences() -> Vec<Sentence> {
        parse_token_text("a\t0\tO\nb\t1\tO\nc\t2\tO\n", "t")
            .unwrap()
            .sentences
    }

    #[test]
    fn parses_single_event() {
        let text = "reader_id,sent_id,word_index,order,duration_ms\nr1,0,0,0,200\n";
        let events = parse_fixation_text(text, &sentences()).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].reader_id, "r1");
        assert_eq!(events[0].duration_ms, 200.0);
    }

    #[test]
    fn duplicate_order_rejected() {
        let text = "reader_id,sent_id,word_index,order,duration_ms\nr1,0,0,0,200\nr1,0,1,0,100\n";
        let err = parse_fixation_text(text, &sentences()).unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateOrder { order: 0, .. }));
    }

    #[test]
    fn non_positive_duration_rejected() {
        let text = "reader_id,sent_id,word_index,order,duration_ms\nr1,0,0,0,-5\n";
        let err = parse_fixation_text(text, &sentences()).unwrap_err();
        assert!(matches!(err, CorpusError::NonPositiveDuration { .. }));
    }

    #[test]
    fn word_index_out_of_range_rejected() {
        let text = "reader_id,sent_id,word_index,order,duration_ms\nr1,0,3,0,50\n";
        let err = parse_fixation_text(text, &sentences()).unwrap_err();
        assert!(matches!(
            err,
            CorpusError::WordIndexOutOfRange { word_index: 3, .. }
        ));
    }

    #[test]
    fn order_gap_rejected() {
        let text = "reader_id,sent_id,word_index,order,duration_ms\nr1,0,0,0,50\nr1,0,1,2,60\n";
        let err = parse_fixation_text(text, &sentences()).unwrap_err();
        assert!(matches!(err, CorpusError::OrderGap { .. }));
    }

    #[test]
    fn unknown_sentence_rejected() {
        let text = "reader_id,sent_id,word_index,order,duration_ms\nr1,9,0,0,50\n";
        let err = parse_fixation_text(text, &sentences()).unwrap_err();
        assert!(matches!(err, CorpusError::UnknownSentence { sent: 9, .. }));
    }

    #[test]
    fn round_trip() {
        let text = "reader_id,sent_id,word_index,order,duration_ms\nr1,0,0,0,200\nr1,0,1,1,150.5\n";
        let events = parse_fixation_text(text, &sentences()).unwrap();
        let serialized = serialize_fixation_file(&events);
        let reparsed = parse_fixation_text(&serialized, &sentences()).unwrap();
        assert_eq!(events, reparsed);
        assert_eq!(serialize_fixation_file(&reparsed), serialized);
    }
}
