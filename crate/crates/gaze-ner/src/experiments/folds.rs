//! Fold construction: k-fold cross-validation plans and the cross-corpus
//! 20/80 alternation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ExperimentError;

/// One cross-validation fold: disjoint train/dev/test sentence indices
/// partitioning the corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub fold_id: usize,
    pub train: Vec<usize>,
    pub dev: Vec<usize>,
    pub test: Vec<usize>,
}

/// Shuffles sentence indices with the seed and assigns slice `i` as fold
/// `i`'s test set and slice `i+1 (mod k)` as its dev set; the rest trains.
pub fn make_folds(n_sentences: usize, k: usize, seed: u64) -> Result<Vec<FoldPlan>, ExperimentError> {
    if k < 2 || n_sentences < k {
        return Err(ExperimentError::CorpusTooSmall {
            needed: k.max(2),
            found: n_sentences,
        });
    }
    let mut ids: Vec<usize> = (0..n_sentences).collect();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let bounds: Vec<usize> = (0..=k).map(|i| i * n_sentences / k).collect();
    let slice = |i: usize| -> &[usize] { &ids[bounds[i]..bounds[i + 1]] };

    Ok((0..k)
        .map(|fold_id| {
            let dev_slice = (fold_id + 1) % k;
            let mut test = slice(fold_id).to_vec();
            let mut dev = slice(dev_slice).to_vec();
            let mut train: Vec<usize> = (0..k)
                .filter(|&s| s != fold_id && s != dev_slice)
                .flat_map(|s| slice(s).iter().copied())
                .collect();
            train.sort_unstable();
            dev.sort_unstable();
            test.sort_unstable();
            FoldPlan {
                fold_id,
                train,
                dev,
                test,
            }
        })
        .collect())
}

/// One cross-corpus fold over the target corpus: 20% dev, 80% test. The
/// training corpus is used in full and is not part of the plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossPlan {
    pub fold_id: usize,
    pub dev: Vec<usize>,
    pub test: Vec<usize>,
}

/// Five alternating folds: each target sentence appears in exactly one dev
/// slice.
pub fn make_cross_plans(n_target: usize, seed: u64) -> Result<Vec<CrossPlan>, ExperimentError> {
    const K: usize = 5;
    if n_target < K {
        return Err(ExperimentError::CorpusTooSmall {
            needed: K,
            found: n_target,
        });
    }
    let mut ids: Vec<usize> = (0..n_target).collect();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let bounds: Vec<usize> = (0..=K).map(|i| i * n_target / K).collect();

    Ok((0..K)
        .map(|fold_id| {
            let mut dev = ids[bounds[fold_id]..bounds[fold_id + 1]].to_vec();
            let mut test: Vec<usize> = (0..K)
                .filter(|&s| s != fold_id)
                .flat_map(|s| ids[bounds[s]..bounds[s + 1]].iter().copied())
                .collect();
            dev.sort_unstable();
            test.sort_unstable();
            CrossPlan {
                fold_id,
                dev,
                test,
            }
        })
        .collect())
}
