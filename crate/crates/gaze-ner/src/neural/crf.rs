//! Linear-chain CRF: exact negative log-likelihood on the tape (log-space
//! forward algorithm) and Viterbi decoding over raw scores.

use rand::Rng;

use super::lstm::xavier;
use super::tape::{NodeId, Tape};
use super::tensor::{ParamId, ParamSet, Tensor};

#[derive(Debug, Clone, Copy)]
pub struct CrfParams {
    /// `transitions[from, to]`.
    pub transitions: ParamId,
    pub start: ParamId,
    pub stop: ParamId,
    pub labels: usize,
}

impl CrfParams {
    pub fn init(params: &mut ParamSet, name: &str, labels: usize, rng: &mut impl Rng) -> Self {
        let transitions =
            params.register(format!("{name}.transitions"), xavier(labels, labels, rng));
        let start = params.register(format!("{name}.start"), Tensor::zeros(labels, 1));
        let stop = params.register(format!("{name}.stop"), Tensor::zeros(labels, 1));
        CrfParams {
            transitions,
            start,
            stop,
            labels,
        }
    }
}

/// Negative log-likelihood of the gold path: `log Z - score(gold)`, where the
/// path score sums start, emission, transition, and stop terms and `log Z` is
/// the log-partition from the forward recursion with per-step log-sum-exp.
pub fn crf_nll(tape: &mut Tape, crf: &CrfParams, emissions: &[NodeId], gold: &[usize]) -> NodeId {
    assert_eq!(emissions.len(), gold.len());
    assert!(!emissions.is_empty());
    let labels = crf.labels;

    let start = tape.param_vec(crf.start);
    let mut alpha = tape.add(emissions[0], start);
    for &emission in &emissions[1..] {
        let steps: Vec<NodeId> = (0..labels)
            .map(|to| tape.lse_add_col(alpha, crf.transitions, to))
            .collect();
        let stacked = tape.concat(&steps);
        alpha = tape.add(stacked, emission);
    }
    let stop = tape.param_vec(crf.stop);
    let final_scores = tape.add(alpha, stop);
    let log_z = tape.log_sum_exp(final_scores);

    let mut gold_terms = Vec::with_capacity(2 * gold.len() + 2);
    gold_terms.push(tape.param_at(crf.start, gold[0], 0));
    for (t, &label) in gold.iter().enumerate() {
        gold_terms.push(tape.pick(emissions[t], label));
        if t + 1 < gold.len() {
            gold_terms.push(tape.param_at(crf.transitions, label, gold[t + 1]));
        }
    }
    gold_terms.push(tape.param_at(crf.stop, gold[gold.len() - 1], 0));
    let gold_score = tape.sum_scalars(&gold_terms);

    tape.sub(log_z, gold_score)
}

/// Highest-scoring label sequence and its score.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub labels: Vec<usize>,
    pub score: f64,
}

/// Viterbi decoding. Ties break toward the lowest label index at every
/// backpointer decision and at the final argmax.
pub fn viterbi_decode(
    emissions: &[Vec<f64>],
    transitions: &Tensor,
    start: &Tensor,
    stop: &Tensor,
) -> Path {
    let n = emissions.len();
    assert!(n > 0);
    let labels = start.rows;

    let mut delta: Vec<f64> = (0..labels)
        .map(|y| start.at(y, 0) + emissions[0][y])
        .collect();
    let mut backpointers: Vec<Vec<usize>> = Vec::with_capacity(n.saturating_sub(1));

    for emission in &emissions[1..] {
        let mut next = vec![f64::NEG_INFINITY; labels];
        let mut back = vec![0usize; labels];
        for to in 0..labels {
            let mut best = f64::NEG_INFINITY;
            let mut best_prev = 0;
            for (prev, &d) in delta.iter().enumerate() {
                let score = d + transitions.at(prev, to);
                if score > best {
                    best = score;
                    best_prev = prev;
                }
            }
            next[to] = best + emission[to];
            back[to] = best_prev;
        }
        delta = next;
        backpointers.push(back);
    }

    let mut best = f64::NEG_INFINITY;
    let mut last = 0;
    for (y, &d) in delta.iter().enumerate() {
        let score = d + stop.at(y, 0);
        if score > best {
            best = score;
            last = y;
        }
    }

    let mut labels_rev = vec![last];
    for back in backpointers.iter().rev() {
        last = back[last];
        labels_rev.push(last);
    }
    labels_rev.reverse();
    Path {
        labels: labels_rev,
        score: best,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::tensor::Gradients;

    fn zero_crf(params: &mut ParamSet, labels: usize) -> CrfParams {
        let transitions = params.register("crf.transitions", Tensor::zeros(labels, labels));
        let start = params.register("crf.start", Tensor::zeros(labels, 1));
        let stop = params.register("crf.stop", Tensor::zeros(labels, 1));
        CrfParams {
            transitions,
            start,
            stop,
            labels,
        }
    }

    /// Enumeration oracle: log-partition and best path over all `L^n` paths.
    fn brute_force(
        emissions: &[Vec<f64>],
        transitions: &Tensor,
        start: &Tensor,
        stop: &Tensor,
    ) -> (f64, Path) {
        let n = emissions.len();
        let labels = start.rows;
        let mut scores: Vec<(Vec<usize>, f64)> = Vec::new();
        let total = labels.pow(n as u32);
        for code in 0..total {
            let mut path = Vec::with_capacity(n);
            let mut c = code;
            for _ in 0..n {
                path.push(c % labels);
                c /= labels;
            }
            let mut score = start.at(path[0], 0) + stop.at(path[n - 1], 0);
            for (t, &y) in path.iter().enumerate() {
                score += emissions[t][y];
                if t + 1 < n {
                    score += transitions.at(y, path[t + 1]);
                }
            }
            scores.push((path, score));
        }
        let max = scores
            .iter()
            .map(|(_, s)| *s)
            .fold(f64::NEG_INFINITY, f64::max);
        let log_z = max
            + scores
                .iter()
                .map(|(_, s)| (s - max).exp())
                .sum::<f64>()
                .ln();
        // Tie rule: among max-score paths, the one whose reversed label
        // sequence is lexicographically smallest.
        let best = scores
            .iter()
            .filter(|(_, s)| *s == max)
            .min_by_key(|(p, _)| {
                let mut r = p.clone();
                r.reverse();
                r
            })
            .unwrap();
        (
            log_z,
            Path {
                labels: best.0.clone(),
                score: max,
            },
        )
    }

    #[test]
    fn length_one_closed_form() {
        let mut params = ParamSet::new();
        let crf = zero_crf(&mut params, 2);
        let mut tape = Tape::new(&params);
        let (a, b) = (1.3, -0.4);
        let e = tape.constant(vec![a, b]);
        let nll = crf_nll(&mut tape, &crf, &[e], &[0]);
        let expected = (a.exp() + b.exp()).ln() - a;
        assert!((tape.scalar(nll) - expected).abs() < 1e-12);
    }

    #[test]
    fn uniform_scores_give_n_log_l() {
        let mut params = ParamSet::new();
        let crf = zero_crf(&mut params, 3);
        let mut tape = Tape::new(&params);
        let emissions: Vec<NodeId> = (0..4).map(|_| tape.constant(vec![0.0; 3])).collect();
        let nll = crf_nll(&mut tape, &crf, &emissions, &[0, 1, 2, 0]);
        assert!((tape.scalar(nll) - 4.0 * 3.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn matches_enumeration_on_random_instances() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let labels = rng.random_range(2..=5);
            let n = rng.random_range(1..=5);
            let mut params = ParamSet::new();
            let t = Tensor::from_rows(
                labels,
                labels,
                (0..labels * labels).map(|_| rng.random_range(-1.0..1.0)).collect(),
            );
            let s = Tensor::vector((0..labels).map(|_| rng.random_range(-1.0..1.0)).collect());
            let p = Tensor::vector((0..labels).map(|_| rng.random_range(-1.0..1.0)).collect());
            let transitions = params.register("t", t.clone());
            let start = params.register("s", s.clone());
            let stop = params.register("p", p.clone());
            let crf = CrfParams {
                transitions,
                start,
                stop,
                labels,
            };
            let emissions: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..labels).map(|_| rng.random_range(-2.0..2.0)).collect())
                .collect();
            let gold: Vec<usize> = (0..n).map(|_| rng.random_range(0..labels)).collect();

            let mut tape = Tape::new(&params);
            let e_nodes: Vec<NodeId> =
                emissions.iter().map(|e| tape.constant(e.clone())).collect();
            let nll = crf_nll(&mut tape, &crf, &e_nodes, &gold);

            let (log_z, best) = brute_force(&emissions, &t, &s, &p);
            let mut gold_score = s.at(gold[0], 0) + p.at(gold[n - 1], 0);
            for (t_idx, &y) in gold.iter().enumerate() {
                gold_score += emissions[t_idx][y];
                if t_idx + 1 < n {
                    gold_score += t.at(y, gold[t_idx + 1]);
                }
            }
            assert!((tape.scalar(nll) - (log_z - gold_score)).abs() < 1e-8);

            let decoded = viterbi_decode(&emissions, &t, &s, &p);
            assert_eq!(decoded.labels, best.labels);
            assert!((decoded.score - best.score).abs() < 1e-8);
        }
    }

    #[test]
    fn viterbi_length_one() {
        let t = Tensor::zeros(2, 2);
        let s = Tensor::zeros(2, 1);
        let p = Tensor::zeros(2, 1);
        let path = viterbi_decode(&[vec![3.0, 1.0]], &t, &s, &p);
        assert_eq!(path.labels, vec![0]);
        assert_eq!(path.score, 3.0);
    }

    #[test]
    fn all_zero_scores_tie_to_label_zero() {
        let t = Tensor::zeros(3, 3);
        let s = Tensor::zeros(3, 1);
        let p = Tensor::zeros(3, 1);
        let path = viterbi_decode(&[vec![0.0; 3], vec![0.0; 3], vec![0.0; 3]], &t, &s, &p);
        assert_eq!(path.labels, vec![0, 0, 0]);
    }

    #[test]
    fn probabilities_normalize_over_all_paths() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let labels = 3;
        let n = 3;
        let mut params = ParamSet::new();
        let t = Tensor::from_rows(
            labels,
            labels,
            (0..labels * labels).map(|_| rng.random_range(-1.0..1.0)).collect(),
        );
        let transitions = params.register("t", t);
        let start = params.register("s", Tensor::zeros(labels, 1));
        let stop = params.register("p", Tensor::zeros(labels, 1));
        let crf = CrfParams {
            transitions,
            start,
            stop,
            labels,
        };
        let emissions: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..labels).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();

        let mut total = 0.0;
        for code in 0..labels.pow(n as u32) {
            let mut path = Vec::new();
            let mut c = code;
            for _ in 0..n {
                path.push(c % labels);
                c /= labels;
            }
            let mut tape = Tape::new(&params);
            let e_nodes: Vec<NodeId> =
                emissions.iter().map(|e| tape.constant(e.clone())).collect();
            let nll = crf_nll(&mut tape, &crf, &e_nodes, &path);
            total += (-tape.scalar(nll)).exp();
        }
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn forward_backward_identity_for_emission_gradients() {
        // d NLL / d emission[t][y] = P(y_t = y) - 1[gold_t = y]
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let labels = 4;
        let n = 4;
        let mut params = ParamSet::new();
        let t = Tensor::from_rows(
            labels,
            labels,
            (0..labels * labels).map(|_| rng.random_range(-1.0..1.0)).collect(),
        );
        let s = Tensor::vector((0..labels).map(|_| rng.random_range(-1.0..1.0)).collect());
        let p = Tensor::vector((0..labels).map(|_| rng.random_range(-1.0..1.0)).collect());
        let transitions = params.register("t", t.clone());
        let start = params.register("s", s.clone());
        let stop = params.register("p", p.clone());
        let crf = CrfParams {
            transitions,
            start,
            stop,
            labels,
        };
        let emissions: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..labels).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let gold = vec![1, 0, 3, 2];

        let mut tape = Tape::new(&params);
        let e_nodes: Vec<NodeId> = emissions.iter().map(|e| tape.constant(e.clone())).collect();
        let nll = crf_nll(&mut tape, &crf, &e_nodes, &gold);
        let mut grads = Gradients::zeros_like(&params);
        let node_grads = tape.backward(nll, &mut grads);

        // Independent marginals by enumeration.
        let mut path_probs: Vec<(Vec<usize>, f64)> = Vec::new();
        for code in 0..labels.pow(n as u32) {
            let mut path = Vec::new();
            let mut c = code;
            for _ in 0..n {
                path.push(c % labels);
                c /= labels;
            }
            let mut score = s.at(path[0], 0) + p.at(path[n - 1], 0);
            for (i, &y) in path.iter().enumerate() {
                score += emissions[i][y];
                if i + 1 < n {
                    score += t.at(y, path[i + 1]);
                }
            }
            path_probs.push((path, score));
        }
        let max = path_probs
            .iter()
            .map(|(_, s)| *s)
            .fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = path_probs.iter().map(|(_, s)| (s - max).exp()).sum();
        for (t_idx, e_node) in e_nodes.iter().enumerate() {
            for y in 0..labels {
                let marginal: f64 = path_probs
                    .iter()
                    .filter(|(path, _)| path[t_idx] == y)
                    .map(|(_, s)| (s - max).exp())
                    .sum::<f64>()
                    / z;
                let indicator = if gold[t_idx] == y { 1.0 } else { 0.0 };
                let grad = node_grads.get(*e_node)[y];
                assert!(
                    (grad - (marginal - indicator)).abs() < 1e-10,
                    "t={t_idx} y={y}: {grad} vs {}",
                    marginal - indicator
                );
            }
        }
    }
}
