//! Split-token alignment: tokens inherit the gaze vector of the
//! whitespace-delimited unit they came from.

use std::collections::HashMap;

use super::{CorpusError, Sentence};

/// Maps each token to its whitespace group's feature vector. Tokens sharing
/// a group receive identical (cloned) vectors. Missing groups are fatal.
pub fn align_split_tokens<V: Clone>(
    sentence: &Sentence,
    group_features: &HashMap<usize, V>,
) -> Result<Vec<V>, CorpusError> {
    sentence
        .tokens
        .iter()
        .map(|token| {
            group_features
                .get(&token.whitespace_group)
                .cloned()
                .ok_or(CorpusError::MissingGroup {
                    sent: sentence.sent_id,
                    group: token.whitespace_group,
                })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_token_text;

    #[test]
    fn split_tokens_get_identical_vectors() {
        let sentence = &parse_token_text("John\t0\tB-PER\n's\t0\tO\n", "t")
            .unwrap()
            .sentences[0];
        let mut features = HashMap::new();
        features.insert(0usize, vec![2.0, 0.5]);
        let aligned = align_split_tokens(sentence, &features).unwrap();
        assert_eq!(aligned.len(), 2);
        assert_eq!(aligned[0], aligned[1]);
        assert_eq!(aligned[0], vec![2.0, 0.5]);
    }

    #[test]
    fn one_token_group_passes_through() {
        let sentence = &parse_token_text("a\t0\tO\n", "t").unwrap().sentences[0];
        let mut features = HashMap::new();
        features.insert(0usize, 7.0);
        assert_eq!(align_split_tokens(sentence, &features).unwrap(), vec![7.0]);
    }

    #[test]
    fn three_tokens_one_group() {
        let sentence = &parse_token_text("a\t0\tO\nb\t0\tO\nc\t0\tO\n", "t")
            .unwrap()
            .sentences[0];
        let mut features = HashMap::new();
        features.insert(0usize, 3.5);
        assert_eq!(
            align_split_tokens(sentence, &features).unwrap(),
            vec![3.5, 3.5, 3.5]
        );
    }

    #[test]
    fn missing_group_is_fatal() {
        let sentence = &parse_token_text("a\t0\tO\nb\t1\tO\n", "t")
            .unwrap()
            .sentences[0];
        let mut features = HashMap::new();
        features.insert(0usize, 1.0);
        let err = align_split_tokens(sentence, &features).unwrap_err();
        assert!(matches!(err, CorpusError::MissingGroup { group: 1, .. }));
    }
}
