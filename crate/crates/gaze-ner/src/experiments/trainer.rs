//! Sentence-level SGD training with dev-set early stopping.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::metrics::evaluate;
use super::ExperimentError;
use crate::corpus::{repair_iob, Label};
use crate::neural::{
    apply_freeze, crf_nll, sgd_step, Gradients, NeuralError, TaggerModel, TokenInput,
};

/// One prepared sentence: model inputs plus gold labels.
#[derive(Debug, Clone)]
pub struct SentenceData {
    pub inputs: Vec<TokenInput>,
    pub gold: Vec<Label>,
}

#[derive(Debug, Clone, Copy)]
pub struct TrainSettings {
    pub max_epochs: usize,
    /// Epochs without dev improvement before stopping.
    pub patience: usize,
}

impl Default for TrainSettings {
    fn default() -> Self {
        TrainSettings {
            max_epochs: 100,
            patience: 20,
        }
    }
}

#[derive(Debug)]
pub struct TrainOutcome {
    pub model: TaggerModel,
    /// 1-based epoch whose parameters are returned.
    pub best_epoch: usize,
    pub best_dev_f: f64,
    pub epochs_run: usize,
    pub dev_f_history: Vec<f64>,
}

/// Stop-rule bookkeeping: strictly better dev F improves; ties keep the
/// earlier epoch.
#[derive(Debug, Clone, Copy)]
pub struct EarlyStopper {
    patience: usize,
    pub best_epoch: usize,
    pub best_f: f64,
}

impl EarlyStopper {
    pub fn new(patience: usize) -> Self {
        EarlyStopper {
            patience,
            best_epoch: 0,
            best_f: f64::NEG_INFINITY,
        }
    }

    /// Observes the dev F after `epoch` (1-based); returns `(improved, stop)`.
    pub fn observe(&mut self, epoch: usize, dev_f: f64) -> (bool, bool) {
        let improved = dev_f > self.best_f;
        if improved {
            self.best_f = dev_f;
            self.best_epoch = epoch;
        }
        (improved, epoch - self.best_epoch >= self.patience)
    }
}

/// Decodes and scores a data set with the current parameters: Viterbi, IOB
/// repair, exact-span micro F.
pub fn dev_micro_f(model: &TaggerModel, data: &[SentenceData]) -> Result<f64, ExperimentError> {
    let predictions = predict_labels(model, data)?;
    let gold: Vec<Vec<Label>> = data.iter().map(|s| s.gold.clone()).collect();
    Ok(evaluate(&gold, &predictions)?.micro_f1())
}

/// Viterbi predictions with post-decoding IOB repair.
pub fn predict_labels(
    model: &TaggerModel,
    data: &[SentenceData],
) -> Result<Vec<Vec<Label>>, ExperimentError> {
    data.iter()
        .map(|sentence| {
            let path = model.decode(&sentence.inputs).map_err(ExperimentError::Neural)?;
            let mut labels: Vec<Label> = path
                .labels
                .iter()
                .map(|&i| Label::from_index(i).expect("decoder stays in label range"))
                .collect();
            repair_iob(&mut labels);
            Ok(labels)
        })
        .collect()
}

/// Trains with one-sentence SGD updates; after each epoch the dev micro-F is
/// evaluated. Returns the model restored to its best dev epoch.
pub fn train_with_early_stopping(
    mut model: TaggerModel,
    train: &[SentenceData],
    dev: &[SentenceData],
    settings: &TrainSettings,
    train_seed: u64,
) -> Result<TrainOutcome, ExperimentError> {
    if train.is_empty() {
        return Err(ExperimentError::EmptySplit("train"));
    }
    if dev.is_empty() {
        return Err(ExperimentError::EmptySplit("dev"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(train_seed);
    let mut grads = Gradients::zeros_like(&model.params);
    let frozen = model.frozen_params();
    let lr = model.config.learning_rate;
    let clip = model.config.gradient_clip;

    let mut stopper = EarlyStopper::new(settings.patience);
    let mut best_params = model.params.clone();
    let mut history = Vec::new();
    let mut epochs_run = 0;

    let mut order: Vec<usize> = (0..train.len()).collect();
    for epoch in 1..=settings.max_epochs {
        epochs_run = epoch;
        order.shuffle(&mut rng);
        for &idx in &order {
            let sentence = &train[idx];
            let gold: Vec<usize> = sentence.gold.iter().map(|l| l.index()).collect();
            grads.reset();
            {
                let (mut tape, emissions) = model
                    .encode_sentence(&sentence.inputs, true, Some(&mut rng))
                    .map_err(ExperimentError::Neural)?;
                let loss = crf_nll(&mut tape, model.crf(), &emissions, &gold);
                if !tape.scalar(loss).is_finite() {
                    return Err(ExperimentError::Diverged { epoch });
                }
                tape.backward(loss, &mut grads);
            }
            apply_freeze(&mut grads, &frozen);
            sgd_step(&mut model.params, &grads, lr, clip).map_err(|e| match e {
                NeuralError::NonFiniteGradient => ExperimentError::Diverged { epoch },
                other => ExperimentError::Neural(other),
            })?;
        }

        let dev_f = dev_micro_f(&model, dev)?;
        history.push(dev_f);
        let (improved, stop) = stopper.observe(epoch, dev_f);
        if improved {
            best_params = model.params.clone();
        }
        if stop {
            break;
        }
    }

    model.params = best_params;
    Ok(TrainOutcome {
        model,
        best_epoch: stopper.best_epoch,
        best_dev_f: stopper.best_f,
        epochs_run,
        dev_f_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_sequence_stops_after_patience() {
        // dev F: 0.5, then 0.6 at epoch 2, then 20 flat epochs -> stop at 22.
        let mut stopper = EarlyStopper::new(20);
        let mut stopped_at = None;
        for epoch in 1..=100 {
            let f = if epoch == 1 { 0.5 } else { 0.6 };
            let (_, stop) = stopper.observe(epoch, f);
            if stop {
                stopped_at = Some(epoch);
                break;
            }
        }
        assert_eq!(stopped_at, Some(22));
        assert_eq!(stopper.best_epoch, 2);
    }

    #[test]
    fn monotone_improvement_never_stops() {
        let mut stopper = EarlyStopper::new(20);
        for epoch in 1..=100 {
            let (improved, stop) = stopper.observe(epoch, epoch as f64);
            assert!(improved);
            assert!(!stop);
        }
        assert_eq!(stopper.best_epoch, 100);
    }

    #[test]
    fn ties_keep_the_earlier_epoch() {
        let mut stopper = EarlyStopper::new(3);
        stopper.observe(1, 0.7);
        let (improved, _) = stopper.observe(2, 0.7);
        assert!(!improved);
        assert_eq!(stopper.best_epoch, 1);
    }
}
