//! Controlled drift injection: covariate noise, label flips, and the four
//! evaluation scenarios.
//!
//! The scenario design carries two structural guarantees that the harness
//! later verifies. Covariate and mixed scenarios share sigma values and the
//! noise seed, so their feature perturbations are bit-identical and any
//! metric difference would expose label leakage. Pure concept drift touches
//! labels only, so its features are bit-identical to baseline. Noise and
//! flip randomness are decoupled by construction: feature perturbation
//! depends only on `noise_seed`, flip selection only on `flip_seed`, each
//! through per-(window, purpose) derived streams.

use serde::{Deserialize, Serialize};

use crate::ingest::{Window, WindowedDataset};
use crate::rng::{self, NormalSource};
use crate::Scalar;

/// The four evaluation scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// No perturbation; natural drift only.
    Baseline,
    /// Gaussian noise on target features, labels untouched.
    Covariate,
    /// Covariate-identical noise plus label flips.
    Mixed,
    /// Label flips only, features untouched.
    PureConcept,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 4] = [
        ScenarioKind::Baseline,
        ScenarioKind::Covariate,
        ScenarioKind::Mixed,
        ScenarioKind::PureConcept,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Baseline => "baseline",
            ScenarioKind::Covariate => "covariate",
            ScenarioKind::Mixed => "mixed",
            ScenarioKind::PureConcept => "pure_concept",
        }
    }
}

/// Per-window sigma multipliers, ramping to a plateau.
const SIGMA_RAMP: [Scalar; 5] = [0.30, 0.60, 1.00, 1.50, 2.00];
/// Flip-rate ramp used by the mixed scenario.
const MIXED_FLIP_RAMP: [Scalar; 5] = [0.02, 0.04, 0.08, 0.12, 0.20];
/// Flip-rate ramp used by the pure concept scenario.
const PURE_FLIP_RAMP: [Scalar; 5] = [0.03, 0.06, 0.10, 0.15, 0.25];

/// Default noise targets of the credit configuration.
pub const DEFAULT_TARGET_FEATURES: [&str; 3] = ["annual_inc", "dti", "revol_util"];

/// Which standard deviation scales the sigma multipliers. Either choice
/// preserves the label-blindness property.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaScale {
    /// Each window's own pre-perturbation standard deviation: every
    /// window's injection is self-contained.
    #[default]
    PerturbedWindow,
    /// The reference window's standard deviation.
    Reference,
}

/// Full injection specification for one scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    /// Sigma multiplier per monitoring window (index 0 = first window after
    /// the reference).
    pub sigma_schedule: Vec<Scalar>,
    /// Label flip rate per monitoring window.
    pub flip_schedule: Vec<Scalar>,
    /// Features receiving Gaussian noise.
    pub target_features: Vec<String>,
    #[serde(default)]
    pub sigma_scale: SigmaScale,
    pub noise_seed: u64,
    pub flip_seed: u64,
}

fn ramp_value(ramp: &[Scalar; 5], window: usize) -> Scalar {
    ramp[window.min(ramp.len() - 1)]
}

/// Build the scheduled spec for a scenario over `monitoring_window_count`
/// windows: the first four windows take the ramp values, later windows hold
/// the plateau. Baseline yields all-zero schedules. Covariate and mixed use
/// identical sigma schedules by construction.
pub fn scenario_schedule(kind: ScenarioKind, monitoring_window_count: usize) -> ScenarioSpec {
    let n = monitoring_window_count;
    let zeros = vec![0.0; n];
    let sigmas: Vec<Scalar> = (0..n).map(|w| ramp_value(&SIGMA_RAMP, w)).collect();
    let (sigma_schedule, flip_schedule) = match kind {
        ScenarioKind::Baseline => (zeros.clone(), zeros),
        ScenarioKind::Covariate => (sigmas, zeros),
        ScenarioKind::Mixed => (
            sigmas,
            (0..n).map(|w| ramp_value(&MIXED_FLIP_RAMP, w)).collect(),
        ),
        ScenarioKind::PureConcept => (
            zeros,
            (0..n).map(|w| ramp_value(&PURE_FLIP_RAMP, w)).collect(),
        ),
    };
    ScenarioSpec {
        kind,
        sigma_schedule,
        flip_schedule,
        target_features: DEFAULT_TARGET_FEATURES
            .iter()
            .map(|s| s.to_string())
            .collect(),
        sigma_scale: SigmaScale::default(),
        noise_seed: 0,
        flip_seed: 1,
    }
}

impl ScenarioSpec {
    pub fn with_target_features(mut self, targets: &[String]) -> Self {
        self.target_features = targets.to_vec();
        self
    }

    pub fn with_seeds(mut self, noise_seed: u64, flip_seed: u64) -> Self {
        self.noise_seed = noise_seed;
        self.flip_seed = flip_seed;
        self
    }

    pub fn with_sigma_scale(mut self, scale: SigmaScale) -> Self {
        self.sigma_scale = scale;
        self
    }
}

/// Injection failures.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InjectError {
    #[error("target feature `{feature}` not present in the dataset")]
    UnknownTargetFeature { feature: String },
    #[error("window {window_index} has unlabeled records; label flips need labels")]
    MissingLabels { window_index: usize },
    #[error("schedule covers {got} windows but the dataset has {expected} monitoring windows")]
    ScheduleMismatch { expected: usize, got: usize },
}

/// Per-window injection accounting for the audit manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowInjection {
    pub window_index: usize,
    pub sigma: Scalar,
    pub flip_rate: Scalar,
    pub labels_flipped: usize,
    /// Perturbed values pushed below zero in features that were wholly
    /// non-negative before perturbation (values are not clamped).
    pub domain_violations: usize,
}

/// A scenario's perturbed dataset plus per-window accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioApplication {
    pub dataset: WindowedDataset,
    pub windows: Vec<WindowInjection>,
}

fn population_std(values: &[Scalar]) -> Scalar {
    let n = values.len() as Scalar;
    let mean = values.iter().sum::<Scalar>() / n;
    (values
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<Scalar>()
        / n)
        .sqrt()
}

fn inject_covariate_counting(
    window: &Window,
    sigma: Scalar,
    target_features: &[String],
    feature_names: &[String],
    noise_seed: u64,
    window_index: usize,
    fixed_stds: Option<&[Scalar]>,
) -> Result<(Window, usize), InjectError> {
    let mut out = window.clone();
    if sigma == 0.0 || window.records.is_empty() {
        return Ok((out, 0));
    }
    let mut violations = 0usize;
    for (k, feature) in target_features.iter().enumerate() {
        let idx = feature_names
            .iter()
            .position(|n| n == feature)
            .ok_or_else(|| InjectError::UnknownTargetFeature {
                feature: feature.clone(),
            })?;
        let values: Vec<Scalar> = out.records.iter().map(|r| r.features[idx]).collect();
        let std = match fixed_stds {
            Some(stds) => stds[k],
            None => population_std(&values),
        };
        if std == 0.0 {
            continue;
        }
        let non_negative_before = values.iter().all(|&v| v >= 0.0);
        let scale = sigma * std;
        let mut source = NormalSource::new(rng::derive_stream(
            noise_seed,
            window_index,
            "noise",
            feature,
        ));
        // Records are already in canonical (timestamp, id) order.
        for record in &mut out.records {
            record.features[idx] += source.next_normal() * scale;
            if non_negative_before && record.features[idx] < 0.0 {
                violations += 1;
            }
        }
    }
    Ok((out, violations))
}

/// Add Gaussian noise `N(0, (σ·s_f)²)` to each target feature, where `s_f`
/// is the feature's standard deviation over the window's pre-perturbation
/// values. Labels are never read or written. `σ = 0` returns the window
/// bit-identical.
pub fn inject_covariate(
    window: &Window,
    sigma: Scalar,
    target_features: &[String],
    feature_names: &[String],
    noise_seed: u64,
    window_index: usize,
) -> Result<Window, InjectError> {
    inject_covariate_counting(
        window,
        sigma,
        target_features,
        feature_names,
        noise_seed,
        window_index,
        None,
    )
    .map(|(w, _)| w)
}

/// `round(x)` half away from zero, for platform-independent flip counts.
fn round_half_away(x: Scalar) -> usize {
    (x + 0.5).floor() as usize
}

fn flip_labels_counting(
    window: &Window,
    rate: Scalar,
    flip_seed: u64,
    window_index: usize,
) -> Result<(Window, usize), InjectError> {
    debug_assert!((0.0..=1.0).contains(&rate));
    let mut out = window.clone();
    if rate == 0.0 || window.records.is_empty() {
        return Ok((out, 0));
    }
    if out.records.iter().any(|r| r.label.is_none()) {
        return Err(InjectError::MissingLabels { window_index });
    }
    let n = out.records.len();
    let flips = round_half_away(rate * n as Scalar);
    let mut stream = rng::derive_stream(flip_seed, window_index, "flip", "");
    for idx in rng::sample_without_replacement(&mut stream, n, flips) {
        let label = out.records[idx].label.expect("checked above");
        out.records[idx].label = Some(1 - label);
    }
    Ok((out, flips))
}

/// Flip exactly `round(rate·n)` labels chosen uniformly without replacement.
/// Features are untouched; selection depends only on `(flip_seed,
/// window_index)`.
pub fn flip_labels(
    window: &Window,
    rate: Scalar,
    flip_seed: u64,
    window_index: usize,
) -> Result<Window, InjectError> {
    flip_labels_counting(window, rate, flip_seed, window_index).map(|(w, _)| w)
}

/// Apply a scenario to a windowed dataset. The reference window is never
/// touched; monitoring window `k` receives its scheduled noise first, then
/// its scheduled flips. Feature perturbation completes before any label
/// flip and never reads labels.
pub fn apply_scenario(
    dataset: &WindowedDataset,
    spec: &ScenarioSpec,
) -> Result<ScenarioApplication, InjectError> {
    let expected = dataset.monitoring_count();
    if spec.sigma_schedule.len() != expected || spec.flip_schedule.len() != expected {
        return Err(InjectError::ScheduleMismatch {
            expected,
            got: spec.sigma_schedule.len().min(spec.flip_schedule.len()),
        });
    }
    // Reference-scaled mode freezes s_f on the reference window once.
    let reference_stds: Option<Vec<Scalar>> = match spec.sigma_scale {
        SigmaScale::PerturbedWindow => None,
        SigmaScale::Reference => Some(
            spec.target_features
                .iter()
                .map(|feature| {
                    let idx = dataset
                        .feature_names
                        .iter()
                        .position(|n| n == feature)
                        .ok_or_else(|| InjectError::UnknownTargetFeature {
                            feature: feature.clone(),
                        })?;
                    let values: Vec<Scalar> = dataset
                        .reference()
                        .records
                        .iter()
                        .map(|r| r.features[idx])
                        .collect();
                    Ok(population_std(&values))
                })
                .collect::<Result<_, InjectError>>()?,
        ),
    };
    let mut windows = Vec::with_capacity(dataset.windows.len());
    let mut summaries = Vec::with_capacity(expected);
    windows.push(dataset.reference().clone());
    for (k, window) in dataset.monitoring_windows().iter().enumerate() {
        let sigma = spec.sigma_schedule[k];
        let flip_rate = spec.flip_schedule[k];
        let (noised, domain_violations) = inject_covariate_counting(
            window,
            sigma,
            &spec.target_features,
            &dataset.feature_names,
            spec.noise_seed,
            window.index,
            reference_stds.as_deref(),
        )?;
        let (flipped, labels_flipped) =
            flip_labels_counting(&noised, flip_rate, spec.flip_seed, window.index)?;
        summaries.push(WindowInjection {
            window_index: window.index,
            sigma,
            flip_rate,
            labels_flipped,
            domain_violations,
        });
        windows.push(flipped);
    }
    Ok(ScenarioApplication {
        dataset: WindowedDataset {
            feature_names: dataset.feature_names.clone(),
            policy: dataset.policy,
            windows,
        },
        windows: summaries,
    })
}
