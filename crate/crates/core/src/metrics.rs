//! Label-free statistical kernels: PSI, two-sample KS, normalized entropy.
//!
//! Everything here is a pure function of samples and frozen bin profiles.
//! The kernels are generic over [`Real`] so the same code backs `f32` and
//! `f64` instantiations.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Proportion floor applied to both sides of the PSI log ratio.
///
/// Flooring (without renormalization) avoids log-of-zero on empty bins while
/// perturbing large proportions negligibly.
pub const PROPORTION_FLOOR: f64 = 1e-6;

/// Clamp applied to probabilities before the entropy logarithms.
pub const ENTROPY_CLAMP: f64 = 1e-12;

/// Errors from the metric kernels.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    /// A sample required by a metric was empty.
    #[error("empty sample")]
    EmptySample,
}

/// Frozen binning of a reference distribution.
///
/// `edges` are the strictly increasing interior boundaries; the outer bins
/// extend to negative and positive infinity, so a profile with `k` edges has
/// `k + 1` bins. Bins are right-closed: a value equal to an edge falls into
/// the bin on its left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinProfile<F> {
    /// Interior bin boundaries, strictly increasing.
    pub edges: Vec<F>,
    /// Reference proportion per bin, summing to 1 before smoothing.
    pub proportions: Vec<F>,
    /// Bin count originally requested; duplicate quantile edges may have
    /// collapsed the profile below it.
    pub requested_bins: usize,
}

impl<F: Real> BinProfile<F> {
    /// Build a quantile-binned profile from a reference sample.
    ///
    /// Edges sit at the `k/bins` quantiles of the sample (linear
    /// interpolation between order statistics). Duplicate edges are
    /// collapsed, so low-cardinality or constant samples yield fewer bins
    /// than requested — down to a single unbounded bin.
    pub fn from_sample(sample: &[F], bins: usize) -> Result<Self, MetricError> {
        if sample.is_empty() {
            return Err(MetricError::EmptySample);
        }
        let mut sorted = sample.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite sample"));
        let edges = quantile_edges(&sorted, bins);
        let mut counts = vec![0usize; edges.len() + 1];
        for &v in sample {
            counts[bin_index(&edges, v)] += 1;
        }
        let n = F::from_usize_lossy(sample.len());
        let proportions = counts.iter().map(|&c| F::from_usize_lossy(c) / n).collect();
        Ok(Self {
            edges,
            proportions,
            requested_bins: bins,
        })
    }

    /// Number of bins after edge collapse.
    pub fn bin_count(&self) -> usize {
        self.edges.len() + 1
    }

    /// True when the profile collapsed to a single unbounded bin.
    pub fn is_degenerate(&self) -> bool {
        self.edges.is_empty()
    }

    /// Proportion of `sample` falling into each bin.
    pub fn sample_proportions(&self, sample: &[F]) -> Result<Vec<F>, MetricError> {
        if sample.is_empty() {
            return Err(MetricError::EmptySample);
        }
        let mut counts = vec![0usize; self.bin_count()];
        for &v in sample {
            counts[bin_index(&self.edges, v)] += 1;
        }
        let n = F::from_usize_lossy(sample.len());
        Ok(counts.iter().map(|&c| F::from_usize_lossy(c) / n).collect())
    }
}

/// Bin index for `v` given interior `edges`: the number of edges strictly
/// below `v`, which makes every bin right-closed.
pub fn bin_index<F: Real>(edges: &[F], v: F) -> usize {
    edges.partition_point(|&e| e < v)
}

/// Interior quantile edges of a sorted sample, duplicates collapsed.
/// A constant sample yields no edges: one unbounded bin.
pub fn quantile_edges<F: Real>(sorted: &[F], bins: usize) -> Vec<F> {
    let n = sorted.len();
    if sorted[0] == sorted[n - 1] {
        return Vec::new();
    }
    let mut edges: Vec<F> = Vec::with_capacity(bins.saturating_sub(1));
    for k in 1..bins {
        let q = k as f64 / bins as f64;
        let h = q * (n - 1) as f64;
        let lo = h.floor() as usize;
        let frac = F::from_f64_lossy(h - lo as f64);
        let edge = if lo + 1 < n {
            sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
        } else {
            sorted[n - 1]
        };
        if edges.last().is_none_or(|&last| edge > last) {
            edges.push(edge);
        }
    }
    edges
}

/// Population Stability Index between two proportion vectors over shared
/// bins: `Σ (pᵢ − qᵢ)·ln(pᵢ/qᵢ)` with both sides floored at `floor` first.
///
/// Every term is non-negative, so the sum is zero exactly when the floored
/// proportions agree, and the statistic is symmetric in its arguments.
pub fn psi_from_proportions<F: Real>(reference: &[F], current: &[F], floor: F) -> F {
    debug_assert_eq!(reference.len(), current.len());
    let mut total = F::zero();
    for (&p, &q) in reference.iter().zip(current) {
        let p = p.max(floor);
        let q = q.max(floor);
        total = total + (p - q) * (p / q).ln();
    }
    total
}

/// PSI of a raw sample against a frozen reference profile.
pub fn psi<F: Real>(reference: &BinProfile<F>, current_sample: &[F]) -> Result<F, MetricError> {
    let current = reference.sample_proportions(current_sample)?;
    Ok(psi_from_proportions(
        &reference.proportions,
        &current,
        F::from_f64_lossy(PROPORTION_FLOOR),
    ))
}

/// Two-sample Kolmogorov-Smirnov statistic: the supremum over observed
/// points of the absolute ECDF difference. No p-value is attached.
pub fn ks_statistic<F: Real>(sample_a: &[F], sample_b: &[F]) -> Result<F, MetricError> {
    if sample_a.is_empty() || sample_b.is_empty() {
        return Err(MetricError::EmptySample);
    }
    let mut a = sample_a.to_vec();
    let mut b = sample_b.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).expect("finite sample"));
    b.sort_by(|x, y| x.partial_cmp(y).expect("finite sample"));
    let (n, m) = (a.len(), b.len());
    let (nf, mf) = (F::from_usize_lossy(n), F::from_usize_lossy(m));
    let mut i = 0usize;
    let mut j = 0usize;
    let mut sup = F::zero();
    while i < n && j < m {
        let t = a[i].min(b[j]);
        while i < n && a[i] <= t {
            i += 1;
        }
        while j < m && b[j] <= t {
            j += 1;
        }
        let diff = (F::from_usize_lossy(i) / nf - F::from_usize_lossy(j) / mf).abs();
        if diff > sup {
            sup = diff;
        }
    }
    Ok(sup)
}

/// Mean normalized binary prediction entropy of a score batch.
///
/// Each probability contributes `−(p·ln p + (1−p)·ln(1−p)) / ln 2`, with `p`
/// clamped to `[ENTROPY_CLAMP, 1 − ENTROPY_CLAMP]`; the result lies in
/// `[0, 1]` and is maximal when every score is 0.5.
pub fn normalized_entropy<F: Real>(scores: &[F]) -> Result<F, MetricError> {
    if scores.is_empty() {
        return Err(MetricError::EmptySample);
    }
    let eps = F::from_f64_lossy(ENTROPY_CLAMP);
    let ln2 = F::from_f64_lossy(std::f64::consts::LN_2);
    let mut total = F::zero();
    for &p in scores {
        debug_assert!(p >= F::zero() && p <= F::one(), "score outside [0,1]");
        let p = p.max(eps).min(F::one() - eps);
        let q = F::one() - p;
        total = total - (p * p.ln() + q * q.ln()) / ln2;
    }
    Ok(total / F::from_usize_lossy(scores.len()))
}

/// Prediction confidence of a binary score: its distance-from-boundary fold
/// `max(p, 1 − p)`.
pub fn fold_confidence<F: Real>(p: F) -> F {
    p.max(F::one() - p)
}
