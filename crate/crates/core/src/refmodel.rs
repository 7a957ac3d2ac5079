//! Deterministic logistic-regression reference scorer.
//!
//! The scorer is fit once on the reference window and frozen; its prediction
//! probabilities feed every proxy monitor. It is intentionally simple — the
//! monitoring signal, not predictive optimality, is the point — so training
//! is plain full-batch gradient descent with zero initialization and a fixed
//! schedule, making two fits on identical data bitwise identical.

use serde::{Deserialize, Serialize};

use crate::ingest::DecisionRecord;
use crate::logreg::{self, FitOptions};
use crate::Scalar;

/// Minimum reference-window size accepted for training.
pub const MIN_TRAINING_RECORDS: usize = 10;

/// Training outcome metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub epochs_run: usize,
    pub final_loss: Scalar,
}

/// Frozen reference scorer: standardization statistics plus coefficients.
///
/// Scoring is a pure function; identical records map to identical
/// probabilities to full precision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceScorer {
    /// Model features, in coefficient order. Zero-variance columns from the
    /// reference window are excluded and listed separately.
    pub feature_order: Vec<String>,
    pub means: Vec<Scalar>,
    pub stds: Vec<Scalar>,
    pub weights: Vec<Scalar>,
    pub intercept: Scalar,
    pub training_meta: TrainingMeta,
    /// Constant columns dropped from the model, kept for the record.
    #[serde(default)]
    pub excluded_zero_variance: Vec<String>,
}

/// Reference-model failures.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("reference window contains a single label class")]
    SingleClassWindow,
    #[error("reference window has {got} records; at least {min} required")]
    TooFewRecords { got: usize, min: usize },
    #[error("{count} reference records lack labels")]
    UnlabeledRecords { count: usize },
    #[error("training diverged: loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("record batch lacks model feature `{feature}`")]
    UnknownFeature { feature: String },
}

impl From<logreg::FitError> for ModelError {
    fn from(e: logreg::FitError) -> Self {
        match e {
            logreg::FitError::NonFiniteLoss { epoch } => ModelError::NonFiniteLoss { epoch },
        }
    }
}

/// Fit the reference scorer on a fully labeled reference window.
///
/// Features are standardized by the window's mean and (population) standard
/// deviation; constant features are excluded rather than rejected, since
/// sliced real data routinely produces them.
pub fn fit_reference(
    reference_window: &[DecisionRecord],
    feature_names: &[String],
    options: &FitOptions,
) -> Result<ReferenceScorer, ModelError> {
    if reference_window.len() < MIN_TRAINING_RECORDS {
        return Err(ModelError::TooFewRecords {
            got: reference_window.len(),
            min: MIN_TRAINING_RECORDS,
        });
    }
    let unlabeled = reference_window
        .iter()
        .filter(|r| r.label.is_none())
        .count();
    if unlabeled > 0 {
        return Err(ModelError::UnlabeledRecords { count: unlabeled });
    }
    let labels: Vec<u8> = reference_window
        .iter()
        .map(|r| r.label.expect("checked above"))
        .collect();
    if labels.iter().all(|&l| l == labels[0]) {
        return Err(ModelError::SingleClassWindow);
    }

    let n = reference_window.len() as Scalar;
    let mut feature_order = Vec::new();
    let mut means = Vec::new();
    let mut stds = Vec::new();
    let mut included_idx = Vec::new();
    let mut excluded = Vec::new();
    for (idx, name) in feature_names.iter().enumerate() {
        let mean = reference_window
            .iter()
            .map(|r| r.features[idx])
            .sum::<Scalar>()
            / n;
        let var = reference_window
            .iter()
            .map(|r| {
                let d = r.features[idx] - mean;
                d * d
            })
            .sum::<Scalar>()
            / n;
        let std = var.sqrt();
        if std > 0.0 {
            feature_order.push(name.clone());
            means.push(mean);
            stds.push(std);
            included_idx.push(idx);
        } else {
            excluded.push(name.clone());
        }
    }

    let rows: Vec<Vec<Scalar>> = reference_window
        .iter()
        .map(|r| {
            included_idx
                .iter()
                .enumerate()
                .map(|(k, &idx)| (r.features[idx] - means[k]) / stds[k])
                .collect()
        })
        .collect();
    let fit = logreg::fit(&rows, &labels, options)?;

    Ok(ReferenceScorer {
        feature_order,
        means,
        stds,
        weights: fit.weights,
        intercept: fit.intercept,
        training_meta: TrainingMeta {
            epochs_run: fit.epochs_run,
            final_loss: fit.final_loss,
        },
        excluded_zero_variance: excluded,
    })
}

impl ReferenceScorer {
    /// Probability for a feature row already aligned with `feature_order`.
    pub fn score_row(&self, row: &[Scalar]) -> Scalar {
        let mut z = self.intercept;
        for (k, &x) in row.iter().enumerate() {
            z += self.weights[k] * (x - self.means[k]) / self.stds[k];
        }
        logreg::sigmoid(z)
    }

    /// Score a record batch; output order matches input order.
    ///
    /// `feature_names` describes the records' feature layout and must cover
    /// every model feature (post-imputation data carries them all).
    pub fn score(
        &self,
        records: &[DecisionRecord],
        feature_names: &[String],
    ) -> Result<Vec<Scalar>, ModelError> {
        let indices: Vec<usize> = self
            .feature_order
            .iter()
            .map(|f| {
                feature_names
                    .iter()
                    .position(|n| n == f)
                    .ok_or_else(|| ModelError::UnknownFeature { feature: f.clone() })
            })
            .collect::<Result<_, _>>()?;
        let mut row = vec![0.0; indices.len()];
        Ok(records
            .iter()
            .map(|r| {
                for (k, &idx) in indices.iter().enumerate() {
                    row[k] = r.features[idx];
                }
                self.score_row(&row)
            })
            .collect())
    }
}
