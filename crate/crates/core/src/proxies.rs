//! The four label-free proxy monitors computed against a frozen reference.
//!
//! A [`ReferenceProfile`] freezes everything the monitors compare against:
//! quantile bins over reference scores and features, a retained reference
//! confidence sample, and the scorer itself. Window metrics are then pure
//! functions of (profile, window records) — they never observe labels, which
//! is the structural property the injection harness verifies.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ingest::DecisionRecord;
use crate::metrics::{self, MetricError};
use crate::refmodel::{ModelError, ReferenceScorer};
use crate::{BinProfile, Scalar};

/// Which transformation of the score feeds the confidence-KS monitor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfidenceSource {
    /// Distance from the decision boundary: `max(p, 1 − p)`.
    #[default]
    Folded,
    /// The raw score; distribution drift there is also covered by score PSI.
    RawScore,
}

/// How per-feature PSI values collapse into the single aggregate column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeaturePsiAggregation {
    /// Arithmetic mean over monitored features; stable under feature-count
    /// changes.
    #[default]
    Mean,
    Max,
}

/// Profile construction knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileOptions {
    /// Quantile bins per distribution (decile convention by default).
    pub bin_count: usize,
    pub confidence_source: ConfidenceSource,
    pub feature_psi_aggregation: FeaturePsiAggregation,
    /// Retained reference confidence sample cap; larger reference windows
    /// are stride-subsampled down to this deterministically.
    pub confidence_retention_cap: usize,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self {
            bin_count: 10,
            confidence_source: ConfidenceSource::default(),
            feature_psi_aggregation: FeaturePsiAggregation::default(),
            confidence_retention_cap: 100_000,
        }
    }
}

/// Frozen window-0 comparison baseline for all proxy monitors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceProfile {
    pub scorer: ReferenceScorer,
    pub monitored_features: Vec<String>,
    pub score_bins: BinProfile,
    pub feature_bins: BTreeMap<String, BinProfile>,
    /// Sorted retained sample of reference-window confidence values.
    pub reference_confidences: Vec<Scalar>,
    pub options: ProfileOptions,
    /// Monitored features whose reference bins collapsed to a single bin.
    pub degenerate_features: Vec<String>,
}

/// Raw values of the four proxy monitors for one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawProxyValues {
    pub score_psi: Scalar,
    pub feature_psi_per_feature: BTreeMap<String, Scalar>,
    pub feature_psi_aggregate: Scalar,
    pub entropy: Scalar,
    pub confidence_ks: Scalar,
}

/// Proxy computation failures.
#[derive(Debug, thiserror::Error)]
pub enum ProxyError {
    #[error("reference window is empty")]
    EmptyReferenceWindow,
    /// Empty monitoring windows carry no metrics; callers report them as
    /// absent rather than zero.
    #[error("window is empty; metrics are absent")]
    EmptyWindow,
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn confidences(scores: &[Scalar], source: ConfidenceSource) -> Vec<Scalar> {
    match source {
        ConfidenceSource::Folded => scores
            .iter()
            .map(|&p| metrics::fold_confidence(p))
            .collect(),
        ConfidenceSource::RawScore => scores.to_vec(),
    }
}

/// Deterministic stride subsample of a sorted vector down to `cap` entries.
fn stride_subsample(sorted: Vec<Scalar>, cap: usize) -> Vec<Scalar> {
    if sorted.len() <= cap {
        return sorted;
    }
    (0..cap).map(|i| sorted[i * sorted.len() / cap]).collect()
}

fn feature_column(records: &[DecisionRecord], idx: usize) -> Vec<Scalar> {
    records.iter().map(|r| r.features[idx]).collect()
}

fn feature_index(feature_names: &[String], name: &str) -> Result<usize, ProxyError> {
    feature_names.iter().position(|n| n == name).ok_or_else(|| {
        ProxyError::Model(ModelError::UnknownFeature {
            feature: name.to_string(),
        })
    })
}

/// Build the frozen reference profile from the (imputed) reference window.
pub fn build_reference_profile(
    reference_window: &[DecisionRecord],
    feature_names: &[String],
    scorer: ReferenceScorer,
    monitored_features: &[String],
    options: ProfileOptions,
) -> Result<ReferenceProfile, ProxyError> {
    if reference_window.is_empty() {
        return Err(ProxyError::EmptyReferenceWindow);
    }
    let scores = scorer.score(reference_window, feature_names)?;
    let score_bins = BinProfile::from_sample(&scores, options.bin_count)?;

    let mut feature_bins = BTreeMap::new();
    let mut degenerate = Vec::new();
    for name in monitored_features {
        let idx = feature_index(feature_names, name)?;
        let bins =
            BinProfile::from_sample(&feature_column(reference_window, idx), options.bin_count)?;
        if bins.is_degenerate() {
            degenerate.push(name.clone());
        }
        feature_bins.insert(name.clone(), bins);
    }

    let mut reference_confidences = confidences(&scores, options.confidence_source);
    reference_confidences.sort_by(|a, b| a.partial_cmp(b).expect("finite confidence"));
    let reference_confidences =
        stride_subsample(reference_confidences, options.confidence_retention_cap);

    Ok(ReferenceProfile {
        scorer,
        monitored_features: monitored_features.to_vec(),
        score_bins,
        feature_bins,
        reference_confidences,
        options,
        degenerate_features: degenerate,
    })
}

/// Compute the four raw proxy values of a window against the profile.
///
/// Pure: the profile is never mutated and repeated calls give identical
/// results. Labels are never read.
pub fn compute_window_metrics(
    profile: &ReferenceProfile,
    window: &[DecisionRecord],
    feature_names: &[String],
) -> Result<RawProxyValues, ProxyError> {
    if window.is_empty() {
        return Err(ProxyError::EmptyWindow);
    }
    let scores = profile.scorer.score(window, feature_names)?;
    let score_psi = metrics::psi(&profile.score_bins, &scores)?;

    let mut per_feature = BTreeMap::new();
    for (name, bins) in &profile.feature_bins {
        let idx = feature_index(feature_names, name)?;
        let value = metrics::psi(bins, &feature_column(window, idx))?;
        per_feature.insert(name.clone(), value);
    }
    let feature_psi_aggregate = match profile.options.feature_psi_aggregation {
        FeaturePsiAggregation::Mean => {
            per_feature.values().sum::<Scalar>() / per_feature.len().max(1) as Scalar
        }
        FeaturePsiAggregation::Max => per_feature.values().fold(0.0, |a: Scalar, &b| a.max(b)),
    };

    let entropy = metrics::normalized_entropy(&scores)?;
    let window_confidences = confidences(&scores, profile.options.confidence_source);
    let confidence_ks = metrics::ks_statistic(&profile.reference_confidences, &window_confidences)?;

    Ok(RawProxyValues {
        score_psi,
        feature_psi_per_feature: per_feature,
        feature_psi_aggregate,
        entropy,
        confidence_ks,
    })
}
