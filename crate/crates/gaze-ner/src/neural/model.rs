//! The tagger: character BiLSTM, word embeddings, per-feature gaze embedding
//! tables, word-level BiLSTM, and a CRF output layer.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::crf::{viterbi_decode, CrfParams, Path};
use super::lstm::{xavier, LstmParams};
use super::tape::{NodeId, Tape};
use super::tensor::{ParamId, ParamSet, Tensor};
use super::NeuralError;
use crate::corpus::{EmbeddingTable, Sentence, LABELS};
use crate::gaze::{BinnedGazeVector, FEATURE_COUNT};

/// Gaze embedding setup: `bins` quantiles plus the UNKNOWN row, each feature
/// embedded in `embed_dim` dimensions (defaults to `bins`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazeConfig {
    pub bins: usize,
    pub embed_dim: usize,
}

impl GazeConfig {
    pub fn with_bins(bins: usize) -> Self {
        GazeConfig {
            bins,
            embed_dim: bins,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub char_embed_dim: usize,
    /// Per direction.
    pub char_lstm_hidden: usize,
    pub word_embed_dim: usize,
    /// Per direction.
    pub word_lstm_hidden: usize,
    /// `None` disables the gaze tables (the baseline architecture).
    pub gaze: Option<GazeConfig>,
    pub dropout_rate: f64,
    pub learning_rate: f64,
    pub gradient_clip: f64,
    pub seed: u64,
    pub freeze_word_embeddings: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            char_embed_dim: 25,
            char_lstm_hidden: 25,
            word_embed_dim: 100,
            word_lstm_hidden: 100,
            gaze: Some(GazeConfig::with_bins(24)),
            dropout_rate: 0.5,
            learning_rate: 0.01,
            gradient_clip: 5.0,
            seed: 0,
            freeze_word_embeddings: false,
        }
    }
}

impl ModelConfig {
    pub fn baseline() -> Self {
        ModelConfig {
            gaze: None,
            ..Default::default()
        }
    }

    /// Width of the concatenated per-token representation fed to the word
    /// BiLSTM: char states + word embedding + 17 gaze embeddings.
    pub fn token_dim(&self) -> usize {
        2 * self.char_lstm_hidden
            + self.word_embed_dim
            + self.gaze.map_or(0, |g| FEATURE_COUNT * g.embed_dim)
    }

    pub fn validate(&self) -> Result<(), NeuralError> {
        if self.char_embed_dim == 0
            || self.char_lstm_hidden == 0
            || self.word_embed_dim == 0
            || self.word_lstm_hidden == 0
        {
            return Err(NeuralError::BadConfig("zero dimension".into()));
        }
        if let Some(g) = self.gaze {
            if g.bins < 2 || g.embed_dim == 0 {
                return Err(NeuralError::BadConfig("bad gaze config".into()));
            }
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(NeuralError::BadConfig(format!(
                "dropout_rate {} outside [0, 1)",
                self.dropout_rate
            )));
        }
        Ok(())
    }
}

/// Word and character id spaces. Ids index sorted vocabularies; the last id
/// of each space is UNK.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub words: Vec<String>,
    pub chars: Vec<char>,
    #[serde(skip)]
    word_index: HashMap<String, usize>,
    #[serde(skip)]
    char_index: HashMap<char, usize>,
}

impl Vocabulary {
    /// Words are the digit-normalized training forms plus the embedding-file
    /// vocabulary; characters come from the normalized training surfaces.
    pub fn build(train: &[&Sentence], embeddings: Option<&EmbeddingTable>) -> Self {
        let mut words: Vec<String> = Vec::new();
        let mut chars: Vec<char> = Vec::new();
        for sentence in train {
            for token in &sentence.tokens {
                words.push(token.normalized.clone());
                chars.extend(token.normalized.chars());
            }
        }
        if let Some(table) = embeddings {
            words.extend(table.sorted_words().iter().map(|w| w.to_string()));
        }
        words.sort();
        words.dedup();
        chars.sort();
        chars.dedup();
        Self::from_parts(words, chars)
    }

    pub fn from_parts(words: Vec<String>, chars: Vec<char>) -> Self {
        let word_index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        let char_index = chars.iter().enumerate().map(|(i, c)| (*c, i)).collect();
        Vocabulary {
            words,
            chars,
            word_index,
            char_index,
        }
    }

    /// Rebuilds the lookup indices after deserialization.
    pub fn reindex(&mut self) {
        *self = Self::from_parts(self.words.clone(), self.chars.clone());
    }

    pub fn n_word_ids(&self) -> usize {
        self.words.len() + 1
    }

    pub fn n_char_ids(&self) -> usize {
        self.chars.len() + 1
    }

    pub fn unk_word(&self) -> usize {
        self.words.len()
    }

    /// Lookup order: exact digit-normalized form, then its lower-cased form,
    /// then UNK.
    pub fn word_id(&self, normalized: &str) -> usize {
        if let Some(&id) = self.word_index.get(normalized) {
            return id;
        }
        if let Some(&id) = self.word_index.get(&normalized.to_lowercase()) {
            return id;
        }
        self.unk_word()
    }

    pub fn char_id(&self, c: char) -> usize {
        *self.char_index.get(&c).unwrap_or(&self.chars.len())
    }
}

/// Model input for one token.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenInput {
    pub word: usize,
    pub chars: Vec<usize>,
    pub gaze: Option<BinnedGazeVector>,
}

/// Builds inputs for a sentence; `bins` must be provided when the model uses
/// gaze features.
pub fn token_inputs(
    vocab: &Vocabulary,
    sentence: &Sentence,
    bins: Option<&[BinnedGazeVector]>,
) -> Vec<TokenInput> {
    sentence
        .tokens
        .iter()
        .enumerate()
        .map(|(i, token)| TokenInput {
            word: vocab.word_id(&token.normalized),
            chars: token.normalized.chars().map(|c| vocab.char_id(c)).collect(),
            gaze: bins.map(|b| b[i]),
        })
        .collect()
}

struct Layers {
    char_table: ParamId,
    word_table: ParamId,
    gaze_tables: Vec<ParamId>,
    char_fwd: LstmParams,
    char_bwd: LstmParams,
    word_fwd: LstmParams,
    word_bwd: LstmParams,
    out_weight: ParamId,
    out_bias: ParamId,
    crf: CrfParams,
}

pub struct TaggerModel {
    pub config: ModelConfig,
    pub vocab: Vocabulary,
    pub params: ParamSet,
    layers: Layers,
}

impl TaggerModel {
    /// Initializes all parameters from the config seed. Word rows covered by
    /// the embedding file copy its vectors; all other embedding rows draw
    /// from N(0, 0.1^2). Gaze tables draw from a separate stream so baseline
    /// and gaze models share the non-gaze initialization bit for bit.
    pub fn new(
        config: ModelConfig,
        vocab: Vocabulary,
        embeddings: Option<&EmbeddingTable>,
    ) -> Result<TaggerModel, NeuralError> {
        config.validate()?;
        if let Some(table) = embeddings {
            if table.dimension != config.word_embed_dim {
                return Err(NeuralError::BadConfig(format!(
                    "embedding file dimension {} != word_embed_dim {}",
                    table.dimension, config.word_embed_dim
                )));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut gaze_rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15);
        let normal = Normal::new(0.0, 0.1).expect("valid stddev");
        let mut params = ParamSet::new();

        let char_table = params.register(
            "char_table",
            gaussian_table(vocab.n_char_ids(), config.char_embed_dim, &normal, &mut rng),
        );

        let mut word_data = Vec::with_capacity(vocab.n_word_ids() * config.word_embed_dim);
        for word in &vocab.words {
            let row = embeddings.and_then(|t| {
                t.get(word)
                    .or_else(|| t.get(&word.to_lowercase()))
                    .map(|v| v.to_vec())
            });
            match row {
                Some(v) => word_data.extend(v),
                None => word_data
                    .extend((0..config.word_embed_dim).map(|_| normal.sample(&mut rng))),
            }
        }
        word_data.extend((0..config.word_embed_dim).map(|_| normal.sample(&mut rng))); // UNK
        let word_table = params.register(
            "word_table",
            Tensor::from_rows(vocab.n_word_ids(), config.word_embed_dim, word_data),
        );

        let char_fwd = LstmParams::init(
            &mut params,
            "char_fwd",
            config.char_embed_dim,
            config.char_lstm_hidden,
            &mut rng,
        );
        let char_bwd = LstmParams::init(
            &mut params,
            "char_bwd",
            config.char_embed_dim,
            config.char_lstm_hidden,
            &mut rng,
        );
        let word_fwd = LstmParams::init(
            &mut params,
            "word_fwd",
            config.token_dim(),
            config.word_lstm_hidden,
            &mut rng,
        );
        let word_bwd = LstmParams::init(
            &mut params,
            "word_bwd",
            config.token_dim(),
            config.word_lstm_hidden,
            &mut rng,
        );
        let out_weight = params.register(
            "out_weight",
            xavier(LABELS.len(), 2 * config.word_lstm_hidden, &mut rng),
        );
        let out_bias = params.register("out_bias", Tensor::zeros(LABELS.len(), 1));
        let crf = CrfParams::init(&mut params, "crf", LABELS.len(), &mut rng);

        let gaze_tables = match config.gaze {
            Some(g) => (0..FEATURE_COUNT)
                .map(|f| {
                    params.register(
                        format!("gaze_table.{f}"),
                        gaussian_table(g.bins + 1, g.embed_dim, &normal, &mut gaze_rng),
                    )
                })
                .collect(),
            None => Vec::new(),
        };

        Ok(TaggerModel {
            config,
            vocab,
            params,
            layers: Layers {
                char_table,
                word_table,
                gaze_tables,
                char_fwd,
                char_bwd,
                word_fwd,
                word_bwd,
                out_weight,
                out_bias,
                crf,
            },
        })
    }

    /// Rebuilds a model around restored parameter tensors (checkpoint load).
    pub fn from_tensors(
        config: ModelConfig,
        vocab: Vocabulary,
        tensors: Vec<(String, Tensor)>,
    ) -> Result<TaggerModel, NeuralError> {
        let mut model = TaggerModel::new(config, vocab, None)?;
        if tensors.len() != model.params.len() {
            return Err(NeuralError::BadCheckpoint(format!(
                "expected {} tensors, found {}",
                model.params.len(),
                tensors.len()
            )));
        }
        for (id, (name, tensor)) in model.params.ids().zip(tensors) {
            let current = model.params.get(id);
            if model.params.name(id) != name || current.rows != tensor.rows || current.cols != tensor.cols
            {
                return Err(NeuralError::BadCheckpoint(format!(
                    "tensor '{name}' does not match the model structure"
                )));
            }
            *model.params.get_mut(id) = tensor;
        }
        Ok(model)
    }

    pub fn crf(&self) -> &CrfParams {
        &self.layers.crf
    }

    /// The word-embedding table id, exempted from updates when frozen.
    pub fn frozen_params(&self) -> Vec<ParamId> {
        if self.config.freeze_word_embeddings {
            vec![self.layers.word_table]
        } else {
            Vec::new()
        }
    }

    fn check_inputs(&self, inputs: &[TokenInput]) -> Result<(), NeuralError> {
        for input in inputs {
            if input.word >= self.vocab.n_word_ids() {
                return Err(NeuralError::IdOutOfRange {
                    kind: "word",
                    id: input.word,
                    max: self.vocab.n_word_ids() - 1,
                });
            }
            if let Some(&c) = input.chars.iter().find(|&&c| c >= self.vocab.n_char_ids()) {
                return Err(NeuralError::IdOutOfRange {
                    kind: "char",
                    id: c,
                    max: self.vocab.n_char_ids() - 1,
                });
            }
            match (self.config.gaze, &input.gaze) {
                (Some(g), Some(bins)) => {
                    if let Some(&b) = bins.bins.iter().find(|&&b| b > g.bins) {
                        return Err(NeuralError::IdOutOfRange {
                            kind: "gaze bin",
                            id: b,
                            max: g.bins,
                        });
                    }
                }
                (Some(_), None) => {
                    return Err(NeuralError::MissingGaze);
                }
                (None, _) => {}
            }
        }
        Ok(())
    }

    /// Runs the network up to the per-token label scores. In train mode a
    /// dropout mask is applied to each concatenated token representation
    /// before the word BiLSTM.
    pub fn encode_sentence<'m>(
        &'m self,
        inputs: &[TokenInput],
        train_mode: bool,
        dropout_rng: Option<&mut ChaCha8Rng>,
    ) -> Result<(Tape<'m>, Vec<NodeId>), NeuralError> {
        self.check_inputs(inputs)?;
        if inputs.is_empty() {
            return Err(NeuralError::EmptySentence);
        }
        let mut tape = Tape::new(&self.params);
        let l = &self.layers;

        let mut masks: Option<(Vec<Vec<f64>>, ())> = None;
        if train_mode && self.config.dropout_rate > 0.0 {
            let rng = dropout_rng.ok_or(NeuralError::MissingRng)?;
            let p = self.config.dropout_rate;
            let scale = 1.0 / (1.0 - p);
            let dim = self.config.token_dim();
            let mask_vecs = inputs
                .iter()
                .map(|_| {
                    (0..dim)
                        .map(|_| if rng.random::<f64>() < p { 0.0 } else { scale })
                        .collect()
                })
                .collect();
            masks = Some((mask_vecs, ()));
        }

        let mut token_vecs = Vec::with_capacity(inputs.len());
        for (i, input) in inputs.iter().enumerate() {
            let char_embeds: Vec<NodeId> = input
                .chars
                .iter()
                .map(|&c| tape.gather_row(l.char_table, c))
                .collect();
            let char_rev: Vec<NodeId> = char_embeds.iter().rev().copied().collect();
            let char_f = l.char_fwd.final_state(&mut tape, &char_embeds);
            let char_b = l.char_bwd.final_state(&mut tape, &char_rev);
            let word = tape.gather_row(l.word_table, input.word);

            let mut parts = vec![char_f, char_b, word];
            if let (Some(_), Some(bins)) = (self.config.gaze, &input.gaze) {
                for (f, &bin) in bins.bins.iter().enumerate() {
                    parts.push(tape.gather_row(l.gaze_tables[f], bin));
                }
            }
            let mut token_vec = tape.concat(&parts);
            if let Some((mask_vecs, ())) = &masks {
                token_vec = tape.mul_const(token_vec, mask_vecs[i].clone());
            }
            token_vecs.push(token_vec);
        }

        let fwd_states = l.word_fwd.run(&mut tape, &token_vecs);
        let rev_inputs: Vec<NodeId> = token_vecs.iter().rev().copied().collect();
        let mut bwd_states = l.word_bwd.run(&mut tape, &rev_inputs);
        bwd_states.reverse();

        let emissions = fwd_states
            .iter()
            .zip(&bwd_states)
            .map(|(&f, &b)| {
                let ctx = tape.concat(&[f, b]);
                let scores = tape.matvec(l.out_weight, ctx);
                tape.add_bias(scores, l.out_bias)
            })
            .collect();
        Ok((tape, emissions))
    }

    /// Decodes the best label sequence for the inputs (no dropout).
    pub fn decode(&self, inputs: &[TokenInput]) -> Result<Path, NeuralError> {
        let (tape, emissions) = self.encode_sentence(inputs, false, None)?;
        let values: Vec<Vec<f64>> = emissions.iter().map(|&e| tape.value(e).to_vec()).collect();
        let crf = &self.layers.crf;
        Ok(viterbi_decode(
            &values,
            self.params.get(crf.transitions),
            self.params.get(crf.start),
            self.params.get(crf.stop),
        ))
    }
}

fn gaussian_table(
    rows: usize,
    cols: usize,
    normal: &Normal<f64>,
    rng: &mut ChaCha8Rng,
) -> Tensor {
    let data: Vec<f64> = (0..rows * cols).map(|_| normal.sample(rng)).collect();
    Tensor::from_rows(rows, cols, data)
}
