//! Descriptive corpus statistics: counts, mean lengths, and mean
//! fixation/gaze durations per token.

use std::collections::HashSet;

use super::Sentence;

/// Per-token gaze summary needed for duration statistics. Durations are the
/// across-reader averages; `fixation_probability == 0` marks a token no
/// reader fixated.
#[derive(Debug, Clone, Copy)]
pub struct TokenGazeSummary {
    pub fixation_probability: f64,
    pub mean_fixation_duration: f64,
    pub total_fixation_duration: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusStats {
    pub sentence_count: usize,
    pub token_count: usize,
    /// Distinct lower-cased surface forms.
    pub unique_types: usize,
    pub mean_sentence_length: f64,
    /// Mean surface length in characters.
    pub mean_word_length: f64,
    /// Mean of per-token mean fixation duration, over fixated tokens.
    pub mean_fixation_duration_ms: Option<f64>,
    /// Mean of per-token total fixation (gaze) duration, over fixated tokens.
    pub mean_gaze_duration_ms: Option<f64>,
}

/// `gaze` is one summary per token, sentence-major, or empty when the corpus
/// has no gaze data. Unfixated tokens are excluded from the duration means.
pub fn corpus_stats(sentences: &[Sentence], gaze: &[TokenGazeSummary]) -> CorpusStats {
    let token_count: usize = sentences.iter().map(|s| s.tokens.len()).sum();
    let mut types: HashSet<String> = HashSet::new();
    let mut char_total = 0usize;
    for sentence in sentences {
        for token in &sentence.tokens {
            types.insert(token.surface.to_lowercase());
            char_total += token.surface.chars().count();
        }
    }

    let fixated: Vec<&TokenGazeSummary> = gaze
        .iter()
        .filter(|g| g.fixation_probability > 0.0)
        .collect();
    let duration_mean = |f: fn(&TokenGazeSummary) -> f64| -> Option<f64> {
        if fixated.is_empty() {
            None
        } else {
            Some(fixated.iter().map(|g| f(g)).sum::<f64>() / fixated.len() as f64)
        }
    };

    CorpusStats {
        sentence_count: sentences.len(),
        token_count,
        unique_types: types.len(),
        mean_sentence_length: if sentences.is_empty() {
            0.0
        } else {
            token_count as f64 / sentences.len() as f64
        },
        mean_word_length: if token_count == 0 {
            0.0
        } else {
            char_total as f64 / token_count as f64
        },
        mean_fixation_duration_ms: duration_mean(|g| g.mean_fixation_duration),
        mean_gaze_duration_ms: duration_mean(|g| g.total_fixation_duration),
    }
}
