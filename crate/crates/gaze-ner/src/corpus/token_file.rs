//! Tab-separated token files: one token per line (`surface TAB group TAB label`),
//! blank line between sentences, `#` comment lines.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::labels::{is_iob_well_formed, parse_label, repair_iob, Label};
use super::{CorpusError, Sentence, Token};

/// Replaces every ASCII digit with `'0'`; all other characters pass through.
pub fn normalize_digits(surface: &str) -> String {
    surface
        .chars()
        .map(|c| if c.is_ascii_digit() { '0' } else { c })
        .collect()
}

/// Result of parsing a token file: validated sentences plus the number of
/// IOB transitions that had to be repaired.
#[derive(Debug)]
pub struct ParsedCorpus {
    pub sentences: Vec<Sentence>,
    pub iob_repairs: usize,
}

pub fn parse_token_file(path: &Path, corpus_id: &str) -> Result<ParsedCorpus, CorpusError> {
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_token_text(&text, corpus_id)
}

pub fn parse_token_text(text: &str, corpus_id: &str) -> Result<ParsedCorpus, CorpusError> {
    let mut sentences = Vec::new();
    let mut iob_repairs = 0;
    let mut tokens: Vec<Token> = Vec::new();
    let mut token_lines: Vec<usize> = Vec::new();

    let mut flush = |tokens: &mut Vec<Token>,
                     token_lines: &mut Vec<usize>,
                     repairs: &mut usize|
     -> Result<(), CorpusError> {
        if tokens.is_empty() {
            return Ok(());
        }
        validate_groups(tokens, token_lines)?;
        let mut labels: Vec<Label> = tokens.iter().map(|t| t.label).collect();
        *repairs += repair_iob(&mut labels);
        for (token, label) in tokens.iter_mut().zip(&labels) {
            token.label = *label;
        }
        debug_assert!(is_iob_well_formed(&labels));
        sentences.push(Sentence {
            corpus_id: corpus_id.to_string(),
            sent_id: sentences.len(),
            tokens: std::mem::take(tokens),
        });
        token_lines.clear();
        Ok(())
    };

    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.starts_with('#') {
            continue;
        }
        if line.trim().is_empty() {
            flush(&mut tokens, &mut token_lines, &mut iob_repairs)?;
            continue;
        }
        let mut cols = line.split('\t');
        let (surface, group, label) = match (cols.next(), cols.next(), cols.next(), cols.next()) {
            (Some(s), Some(g), Some(l), None) => (s, g, l),
            _ => {
                return Err(CorpusError::ColumnCount {
                    line: lineno,
                    expected: 3,
                    found: line.split('\t').count(),
                })
            }
        };
        let group: usize = group.parse().map_err(|_| CorpusError::BadField {
            line: lineno,
            field: "whitespace_group",
            value: group.to_string(),
        })?;
        let label = parse_label(label, lineno)?;
        tokens.push(Token {
            normalized: normalize_digits(surface),
            surface: surface.to_string(),
            label,
            whitespace_group: group,
        });
        token_lines.push(lineno);
    }
    flush(&mut tokens, &mut token_lines, &mut iob_repairs)?;

    Ok(ParsedCorpus {
        sentences,
        iob_repairs,
    })
}

/// Groups must start at 0 and advance by at most 1 per token.
fn validate_groups(tokens: &[Token], lines: &[usize]) -> Result<(), CorpusError> {
    let mut prev: Option<usize> = None;
    for (token, &line) in tokens.iter().zip(lines) {
        let ok = match prev {
            None => token.whitespace_group == 0,
            Some(p) => token.whitespace_group == p || token.whitespace_group == p + 1,
        };
        if !ok {
            return Err(CorpusError::BadGroupSequence {
                line,
                group: token.whitespace_group,
            });
        }
        prev = Some(token.whitespace_group);
    }
    Ok(())
}

/// Canonical serialization: tab-separated columns, one blank line between
/// sentences, trailing newline. `parse(serialize(s)) == s` and serialization
/// of a parse is a fixed point.
pub fn serialize_token_file(sentences: &[Sentence]) -> String {
    let mut out = String::new();
    for (i, sentence) in sentences.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for token in &sentence.tokens {
            writeln!(
                out,
                "{}\t{}\t{}",
                token.surface, token.whitespace_group, token.label
            )
            .unwrap();
        }
    }
    out
}

pub fn write_token_file(path: &Path, sentences: &[Sentence]) -> Result<(), CorpusError> {
    fs::write(path, serialize_token_file(sentences)).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}
