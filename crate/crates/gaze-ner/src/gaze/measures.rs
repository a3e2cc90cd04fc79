//! Reading measures from chronological fixation sequences: per-reader word
//! measures, across-reader averaging, and neighboring-word context features.

use super::{feature, GazeError, RawGazeVector};

/// Word-level reading measures for one reader on one sentence. Words the
/// reader never fixated yield the all-zero record with `fixated == false`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReaderWordMeasures {
    pub fixated: bool,
    pub n_fixations: usize,
    pub first_fixation_duration: f64,
    /// Duration of the maximal run of consecutive fixations on the word
    /// starting at its first fixation, ending when any other word is fixated.
    pub first_pass_duration: f64,
    pub total_duration: f64,
    pub n_refixations: usize,
    pub reread: bool,
    /// Summed durations of fixations after a saccade launched from this word
    /// to a strictly earlier word, up to (excluding) the next fixation at an
    /// index at or beyond this word.
    pub regression_from_duration: f64,
}

/// Computes the measures for `word_index` from one reader's chronological
/// fixation sequence `(word_index, duration_ms)` over a sentence.
pub fn reader_word_measures(sequence: &[(usize, f64)], word_index: usize) -> ReaderWordMeasures {
    let mut m = ReaderWordMeasures::default();
    let mut first_seen = None;
    for (pos, &(w, duration)) in sequence.iter().enumerate() {
        if w != word_index {
            continue;
        }
        m.n_fixations += 1;
        m.total_duration += duration;
        if first_seen.is_none() {
            first_seen = Some(pos);
            m.first_fixation_duration = duration;
        }
    }
    let Some(first) = first_seen else {
        return m;
    };
    m.fixated = true;
    m.n_refixations = m.n_fixations - 1;
    m.reread = m.n_fixations >= 2;

    for &(w, duration) in &sequence[first..] {
        if w != word_index {
            break;
        }
        m.first_pass_duration += duration;
    }

    // Regressions launched from this word: each fixation on the word followed
    // by a fixation strictly to its left opens a window that closes at the
    // next fixation at or beyond the word.
    let mut pos = 0;
    while pos + 1 < sequence.len() {
        if sequence[pos].0 == word_index && sequence[pos + 1].0 < word_index {
            let mut j = pos + 1;
            while j < sequence.len() && sequence[j].0 < word_index {
                m.regression_from_duration += sequence[j].1;
                j += 1;
            }
            pos = j;
        } else {
            pos += 1;
        }
    }

    m
}

/// Averages per-reader records into the word-local gaze features.
///
/// Probabilities divide by the full reader count; duration and count
/// features average over fixating readers only (zero when none fixated).
/// Context slots are left unset.
pub fn average_readers(
    records: &[ReaderWordMeasures],
    reader_count: usize,
) -> Result<RawGazeVector, GazeError> {
    if reader_count == 0 {
        return Err(GazeError::NoReaders);
    }
    let fixating: Vec<&ReaderWordMeasures> = records.iter().filter(|r| r.fixated).collect();
    let n_fixating = fixating.len();
    let rereaders = records.iter().filter(|r| r.reread).count();

    let mean_over_fixating = |f: &dyn Fn(&ReaderWordMeasures) -> f64| -> f64 {
        if n_fixating == 0 {
            0.0
        } else {
            fixating.iter().map(|r| f(r)).sum::<f64>() / n_fixating as f64
        }
    };

    let mut v = RawGazeVector::empty();
    v.values[feature::N_FIXATIONS] = Some(mean_over_fixating(&|r| r.n_fixations as f64));
    v.values[feature::FIXATION_PROBABILITY] = Some(n_fixating as f64 / reader_count as f64);
    v.values[feature::MEAN_FIXATION_DURATION] =
        Some(mean_over_fixating(&|r| r.total_duration / r.n_fixations as f64));
    v.values[feature::FIRST_FIXATION_DURATION] =
        Some(mean_over_fixating(&|r| r.first_fixation_duration));
    v.values[feature::FIRST_PASS_DURATION] = Some(mean_over_fixating(&|r| r.first_pass_duration));
    v.values[feature::TOTAL_FIXATION_DURATION] = Some(mean_over_fixating(&|r| r.total_duration));
    v.values[feature::N_REFIXATIONS] = Some(mean_over_fixating(&|r| r.n_refixations as f64));
    v.values[feature::REREAD_PROBABILITY] = Some(rereaders as f64 / reader_count as f64);
    v.values[feature::TOTAL_REGRESSION_FROM_DURATION] =
        Some(mean_over_fixating(&|r| r.regression_from_duration));
    Ok(v)
}

/// Fills the w-2/w-1/w+1/w+2 context slots of every word in a sentence from
/// its neighbors' fixation probability and mean fixation duration. Slots
/// past the sentence boundary stay unset and bin to UNKNOWN.
pub fn add_context_features(words: &mut [RawGazeVector]) {
    let probs: Vec<Option<f64>> = words.iter().map(|w| w.fixation_probability()).collect();
    let durs: Vec<Option<f64>> = words.iter().map(|w| w.mean_fixation_duration()).collect();
    let offsets: [isize; 4] = [-2, -1, 1, 2];
    for (i, word) in words.iter_mut().enumerate() {
        for (slot, &offset) in offsets.iter().enumerate() {
            let j = i as isize + offset;
            let (p, d) = if j >= 0 && (j as usize) < probs.len() {
                (probs[j as usize], durs[j as usize])
            } else {
                (None, None)
            };
            word.values[feature::CONTEXT_PROB[slot]] = p;
            word.values[feature::CONTEXT_DUR[slot]] = d;
        }
    }
}
