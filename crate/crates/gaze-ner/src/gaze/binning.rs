//! Quantile discretization of gaze features. Thresholds are fitted per
//! corpus; a value's bin is the number of cut points strictly below it.

use serde::{Deserialize, Serialize};

use super::{GazeError, RawGazeVector, FEATURE_COUNT};

/// Per-feature cut points: `bins - 1` non-decreasing values each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinThresholds {
    pub bins: usize,
    pub cuts: Vec<Vec<f64>>,
}

/// The 17 quantile-bin indices of one token. Indices lie in `0..bins`;
/// `bins` itself is the UNKNOWN sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinnedGazeVector {
    pub bins: [usize; FEATURE_COUNT],
}

impl BinnedGazeVector {
    pub fn all_unknown(bin_count: usize) -> Self {
        BinnedGazeVector {
            bins: [bin_count; FEATURE_COUNT],
        }
    }
}

/// Fits per-feature cut points at the j/B empirical quantiles (j = 1..B-1)
/// of the observed values. Unknown slots contribute nothing to the fit.
pub fn fit_bins(vectors: &[RawGazeVector], bins: usize) -> Result<BinThresholds, GazeError> {
    if bins < 2 {
        return Err(GazeError::BadBinCount(bins));
    }
    if vectors.is_empty() {
        return Err(GazeError::EmptyInput);
    }
    let mut cuts = Vec::with_capacity(FEATURE_COUNT);
    for f in 0..FEATURE_COUNT {
        let mut observed: Vec<f64> = vectors.iter().filter_map(|v| v.values[f]).collect();
        observed.sort_by(f64::total_cmp);
        cuts.push(quantile_cuts(&observed, bins));
    }
    Ok(BinThresholds { bins, cuts })
}

/// Cut j (1-based) is the order statistic at rank ceil(j*n/bins) of the
/// sorted sample, so distinct values spread across bins with counts
/// differing by at most one.
fn quantile_cuts(sorted: &[f64], bins: usize) -> Vec<f64> {
    let n = sorted.len();
    if n == 0 {
        return vec![0.0; bins - 1];
    }
    (1..bins)
        .map(|j| {
            let rank = (j * n).div_ceil(bins); // 1-based
            sorted[rank.saturating_sub(1)]
        })
        .collect()
}

/// Bins one feature value: the count of cut points strictly below it,
/// capped at `bins - 1`.
pub fn bin_value(value: f64, cuts: &[f64], bins: usize) -> usize {
    cuts.partition_point(|c| *c < value).min(bins - 1)
}

/// Discretizes a vector; unknown slots map to the sentinel `bins`.
pub fn apply_bins(vector: &RawGazeVector, thresholds: &BinThresholds) -> BinnedGazeVector {
    let mut bins = [thresholds.bins; FEATURE_COUNT];
    for f in 0..FEATURE_COUNT {
        if let Some(v) = vector.values[f] {
            bins[f] = bin_value(v, &thresholds.cuts[f], thresholds.bins);
        }
    }
    BinnedGazeVector { bins }
}
