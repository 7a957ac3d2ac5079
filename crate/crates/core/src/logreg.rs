//! Full-batch gradient-descent logistic regression.
//!
//! Deterministic by construction: zero initialization, a fixed learning-rate
//! schedule, and a sequential fold over epochs, so two fits on identical data
//! produce bitwise identical weights. The kernel works on an already
//! standardized design matrix; feature standardization is the caller's job.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Training hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Constant learning rate.
    pub learning_rate: f64,
    /// Upper bound on full-batch epochs.
    pub max_epochs: usize,
    /// Stop when the absolute loss change between epochs drops below this.
    pub loss_tolerance: f64,
    /// L2 penalty on the weights (not the intercept); zero disables it.
    pub l2: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            max_epochs: 500,
            loss_tolerance: 1e-8,
            l2: 0.0,
        }
    }
}

/// Fitted coefficients plus training metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fit<F> {
    pub weights: Vec<F>,
    pub intercept: F,
    pub epochs_run: usize,
    pub final_loss: F,
}

/// Errors from the training loop.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FitError {
    /// The loss left the finite range, which signals a learning-rate
    /// misconfiguration.
    #[error("loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
}

/// Numerically stable logistic function.
pub fn sigmoid<F: Real>(z: F) -> F {
    if z >= F::zero() {
        F::one() / (F::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (F::one() + e)
    }
}

fn linear<F: Real>(row: &[F], weights: &[F], intercept: F) -> F {
    let mut z = intercept;
    for (&x, &w) in row.iter().zip(weights) {
        z = z + w * x;
    }
    z
}

/// Mean log-loss of the model on `rows`/`labels`, in the overflow-safe
/// `softplus(z) − y·z` form, plus the L2 penalty when configured.
pub fn log_loss<F: Real>(rows: &[Vec<F>], labels: &[u8], weights: &[F], intercept: F, l2: F) -> F {
    let mut total = F::zero();
    for (row, &y) in rows.iter().zip(labels) {
        let z = linear(row, weights, intercept);
        let softplus = z.max(F::zero()) + (-z.abs()).exp().ln_1p();
        let yz = if y == 1 { z } else { F::zero() };
        total = total + softplus - yz;
    }
    let n = F::from_usize_lossy(rows.len());
    let mut loss = total / n;
    if l2 > F::zero() {
        let half = F::from_f64_lossy(0.5);
        let sq: F = weights.iter().fold(F::zero(), |acc, &w| acc + w * w);
        loss = loss + half * l2 * sq;
    }
    loss
}

/// Mean log-loss gradient with respect to (weights, intercept).
pub fn log_loss_gradient<F: Real>(
    rows: &[Vec<F>],
    labels: &[u8],
    weights: &[F],
    intercept: F,
    l2: F,
) -> (Vec<F>, F) {
    let d = weights.len();
    let mut grad_w = vec![F::zero(); d];
    let mut grad_b = F::zero();
    for (row, &y) in rows.iter().zip(labels) {
        let p = sigmoid(linear(row, weights, intercept));
        let err = p - F::from_usize_lossy(y as usize);
        for (g, &x) in grad_w.iter_mut().zip(row) {
            *g = *g + err * x;
        }
        grad_b = grad_b + err;
    }
    let n = F::from_usize_lossy(rows.len());
    for (g, &w) in grad_w.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
    }
    (grad_w, grad_b / n)
}

/// Fit logistic regression by full-batch gradient descent.
///
/// `rows` must all share the same dimension and `labels` must be 0/1 of the
/// same length; the caller validates class balance and sample size.
pub fn fit<F: Real>(rows: &[Vec<F>], labels: &[u8], opts: &FitOptions) -> Result<Fit<F>, FitError> {
    debug_assert_eq!(rows.len(), labels.len());
    let d = rows.first().map_or(0, Vec::len);
    let lr = F::from_f64_lossy(opts.learning_rate);
    let tol = F::from_f64_lossy(opts.loss_tolerance);
    let l2 = F::from_f64_lossy(opts.l2);

    let mut weights = vec![F::zero(); d];
    let mut intercept = F::zero();
    let mut prev_loss = log_loss(rows, labels, &weights, intercept, l2);
    let mut epochs_run = 0;

    for epoch in 1..=opts.max_epochs {
        let (grad_w, grad_b) = log_loss_gradient(rows, labels, &weights, intercept, l2);
        for (w, g) in weights.iter_mut().zip(&grad_w) {
            *w = *w - lr * *g;
        }
        intercept = intercept - lr * grad_b;

        let loss = log_loss(rows, labels, &weights, intercept, l2);
        if !loss.is_finite() {
            return Err(FitError::NonFiniteLoss { epoch });
        }
        epochs_run = epoch;
        if (loss - prev_loss).abs() < tol {
            prev_loss = loss;
            break;
        }
        prev_loss = loss;
    }

    Ok(Fit {
        weights,
        intercept,
        epochs_run,
        final_loss: prev_loss,
    })
}
