//! Exact-span entity evaluation: a predicted span is a true positive only
//! when class, start, and end all match a gold span.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::corpus::{EntityClass, Label};

/// One entity span; `end` is inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Span {
    pub class: EntityClass,
    pub start: usize,
    pub end: usize,
}

/// Extracts spans from an IOB sequence. `B-X` always opens a span; a stray
/// `I-X` (after `O`, start, or a different class) opens one too, matching
/// the repair rule.
pub fn extract_spans(labels: &[Label]) -> Vec<Span> {
    let mut spans = Vec::new();
    let mut open: Option<Span> = None;
    for (i, &label) in labels.iter().enumerate() {
        match label {
            Label::Outside => {
                if let Some(span) = open.take() {
                    spans.push(span);
                }
            }
            Label::Begin(class) => {
                if let Some(span) = open.take() {
                    spans.push(span);
                }
                open = Some(Span {
                    class,
                    start: i,
                    end: i,
                });
            }
            Label::Inside(class) => match &mut open {
                Some(span) if span.class == class => span.end = i,
                _ => {
                    if let Some(span) = open.take() {
                        spans.push(span);
                    }
                    open = Some(Span {
                        class,
                        start: i,
                        end: i,
                    });
                }
            },
        }
    }
    if let Some(span) = open {
        spans.push(span);
    }
    spans
}

/// True/false positive and false negative counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrfCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_count: usize,
}

impl PrfCounts {
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_count)
    }

    pub fn f1(&self) -> f64 {
        let p = self.precision();
        let r = self.recall();
        if p + r > 0.0 {
            2.0 * p * r / (p + r)
        } else {
            0.0
        }
    }

    fn add(&mut self, other: &PrfCounts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_count += other.fn_count;
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Result of evaluating one prediction set against gold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanEval {
    pub micro: PrfCounts,
    pub per_class: BTreeMap<EntityClass, PrfCounts>,
}

impl SpanEval {
    pub fn micro_f1(&self) -> f64 {
        self.micro.f1()
    }
}

/// Span-level precision/recall/F over aligned gold and predicted label
/// sequences. Fails when sentence counts or lengths disagree.
pub fn evaluate(gold: &[Vec<Label>], predicted: &[Vec<Label>]) -> Result<SpanEval, ExperimentError> {
    if gold.len() != predicted.len() {
        return Err(ExperimentError::LengthMismatch {
            expected: gold.len(),
            found: predicted.len(),
        });
    }
    let mut per_class: BTreeMap<EntityClass, PrfCounts> = EntityClass::ALL
        .iter()
        .map(|&c| (c, PrfCounts::default()))
        .collect();

    for (g, p) in gold.iter().zip(predicted) {
        if g.len() != p.len() {
            return Err(ExperimentError::LengthMismatch {
                expected: g.len(),
                found: p.len(),
            });
        }
        let gold_spans = extract_spans(g);
        let pred_spans = extract_spans(p);
        for span in &pred_spans {
            let counts = per_class.get_mut(&span.class).expect("all classes present");
            if gold_spans.contains(span) {
                counts.tp += 1;
            } else {
                counts.fp += 1;
            }
        }
        for span in &gold_spans {
            if !pred_spans.contains(span) {
                per_class.get_mut(&span.class).expect("all classes present").fn_count += 1;
            }
        }
    }

    let mut micro = PrfCounts::default();
    for counts in per_class.values() {
        micro.add(counts);
    }
    Ok(SpanEval { micro, per_class })
}
