//! Pre-trained word-vector files: `word v1 ... vD` per line, space-separated.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use super::CorpusError;

#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    pub dimension: usize,
    pub entries: HashMap<String, Vec<f64>>,
    /// Rows dropped because their arity did not match `dimension`.
    pub skipped_rows: usize,
}

impl EmbeddingTable {
    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.entries.get(word).map(|v| v.as_slice())
    }

    /// Words in deterministic (sorted) order, for vocabulary construction.
    pub fn sorted_words(&self) -> Vec<&str> {
        let mut words: Vec<&str> = self.entries.keys().map(|s| s.as_str()).collect();
        words.sort_unstable();
        words
    }
}

pub fn load_embeddings(path: &Path, dimension: usize) -> Result<EmbeddingTable, CorpusError> {
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let table = parse_embeddings_text(&text, dimension);
    if table.entries.is_empty() {
        return Err(CorpusError::EmptyEmbeddings {
            path: path.to_path_buf(),
        });
    }
    Ok(table)
}

pub fn parse_embeddings_text(text: &str, dimension: usize) -> EmbeddingTable {
    let mut entries = HashMap::new();
    let mut skipped_rows = 0;
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let Some(word) = fields.next() else {
            continue;
        };
        let values: Option<Vec<f64>> = fields.map(|f| f.parse::<f64>().ok()).collect();
        match values {
            Some(v) if v.len() == dimension => {
                entries.insert(word.to_string(), v);
            }
            _ => skipped_rows += 1,
        }
    }
    EmbeddingTable {
        dimension,
        entries,
        skipped_rows,
    }
}
