//! Evaluation harness: scenario runs over a fixed reference profile,
//! delta computation against baseline, and the structural verifications.
//!
//! The two verifications machine-check the detectability boundary rather
//! than assume it. Monitors are deterministic functions of features and
//! model predictions, never labels, so covariate and mixed runs sharing a
//! noise seed must agree bit-for-bit on every label-free metric, and a
//! pure-concept run must be indistinguishable from baseline. Any nonzero
//! discrepancy is a failing result, not a tolerance violation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::ProfileDocument;
use crate::ingest::{self, IngestError, RecordBatch, WindowPolicy, WindowedDataset};
use crate::inject::{self, InjectError, ScenarioKind, ScenarioSpec, WindowInjection};
use crate::logreg::FitOptions;
use crate::monitor::{self, CumulativeState, GovernanceAlert, MonitorConfig, MonitorError};
use crate::proxies::{self, ProfileOptions, ProxyError, RawProxyValues, ReferenceProfile};
use crate::refmodel::{self, ModelError};
use crate::report::{self, DatasetFingerprint, MetricRanges, ReportDocument, Seeds};
use crate::rng::RNG_ALGORITHM;
use crate::Scalar;

/// Harness failures; mostly propagated from the stages it composes.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Proxy(#[from] ProxyError),
    #[error(transparent)]
    Monitor(#[from] MonitorError),
    #[error(transparent)]
    Inject(#[from] InjectError),
    #[error("runs cover {a} and {b} windows; cannot compare")]
    WindowCountMismatch { a: usize, b: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One monitoring window's outcome within a run. Empty windows carry no
/// metrics and no alert — absent, not zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowOutcome {
    pub window_index: usize,
    pub label: String,
    pub records: usize,
    pub raw: Option<RawProxyValues>,
    pub alert: Option<GovernanceAlert>,
}

/// Audit manifest for one scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario: ScenarioKind,
    pub sigma_schedule: Vec<Scalar>,
    pub flip_schedule: Vec<Scalar>,
    pub target_features: Vec<String>,
    pub noise_seed: u64,
    pub flip_seed: u64,
    pub rng_algorithm: String,
    pub injection: Vec<WindowInjection>,
    pub config_sha256: String,
    pub dataset: DatasetFingerprint,
}

/// A full scenario run: per-window metrics and alerts against the fixed
/// reference profile, plus the final cumulative state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRun {
    pub scenario: ScenarioKind,
    pub windows: Vec<WindowOutcome>,
    pub final_state: CumulativeState,
    pub manifest: RunManifest,
}

/// Per-window metric deltas of an injected run minus baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub window_index: usize,
    pub score_psi: Scalar,
    pub feature_psi_aggregate: Scalar,
    pub entropy: Scalar,
    pub confidence_ks: Scalar,
    pub composite: Scalar,
}

/// Injected-minus-baseline deltas per window, with per-metric ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub scenario: ScenarioKind,
    /// One entry per monitoring window; `None` when either side's metrics
    /// are absent.
    pub rows: Vec<Option<DeltaRow>>,
    pub ranges: MetricRanges,
}

/// Outcome of one structural verification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationResult {
    pub check: String,
    pub pass: bool,
    /// Maximum absolute metric discrepancy observed; the structural checks
    /// demand exactly zero.
    pub max_discrepancy: Scalar,
    pub windows: Vec<WindowDiscrepancy>,
}

/// Largest per-window discrepancy across all compared metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowDiscrepancy {
    pub window_index: usize,
    pub discrepancy: Scalar,
}

/// Prepared dataset: partitioned, reference-mean imputed, canonical order.
#[derive(Debug, Clone)]
pub struct PreparedDataset {
    pub dataset: WindowedDataset,
    pub imputation_means: BTreeMap<String, Scalar>,
    pub imputed_counts: BTreeMap<String, usize>,
}

fn canonicalize(dataset: &mut WindowedDataset) {
    for window in &mut dataset.windows {
        window
            .records
            .sort_by(|a, b| (a.timestamp, &a.id).cmp(&(b.timestamp, &b.id)));
    }
}

/// Partition a batch and impute every window with reference-window means.
pub fn prepare_dataset(
    batch: &RecordBatch,
    policy: WindowPolicy,
) -> Result<PreparedDataset, IngestError> {
    let mut dataset = ingest::partition_windows(batch, policy)?;
    let means = ingest::feature_means(&dataset.windows[0].records, &dataset.feature_names)?;
    let mut total_counts: BTreeMap<String, usize> = BTreeMap::new();
    let names = dataset.feature_names.clone();
    for window in &mut dataset.windows {
        let counts = ingest::impute_missing(&mut window.records, &names, &means)?;
        for (k, v) in counts {
            *total_counts.entry(k).or_insert(0) += v;
        }
    }
    canonicalize(&mut dataset);
    Ok(PreparedDataset {
        dataset,
        imputation_means: means,
        imputed_counts: total_counts,
    })
}

/// Partition a batch for monitoring against an existing profile: impute
/// with the profile's frozen means; a single window is acceptable.
pub fn prepare_monitoring_dataset(
    batch: &RecordBatch,
    policy: WindowPolicy,
    means: &BTreeMap<String, Scalar>,
) -> Result<WindowedDataset, IngestError> {
    let mut dataset = ingest::partition_windows_min(batch, policy, 1)?;
    let names = dataset.feature_names.clone();
    for window in &mut dataset.windows {
        ingest::impute_missing(&mut window.records, &names, means)?;
    }
    canonicalize(&mut dataset);
    Ok(dataset)
}

/// Run one scenario: inject per the spec, compute metrics per monitoring
/// window against the fixed reference profile, and fold the cumulative
/// state strictly in window order.
pub fn run_scenario(
    dataset: &WindowedDataset,
    spec: &ScenarioSpec,
    profile: &ReferenceProfile,
    config: &MonitorConfig,
) -> Result<ScenarioRun, HarnessError> {
    let application = inject::apply_scenario(dataset, spec)?;
    let mut state = CumulativeState::default();
    let mut windows = Vec::with_capacity(application.dataset.monitoring_count());
    for window in application.dataset.monitoring_windows() {
        let (raw, alert) = if window.records.is_empty() {
            (None, None)
        } else {
            let raw = proxies::compute_window_metrics(
                profile,
                &window.records,
                &application.dataset.feature_names,
            )?;
            let (alert, next) = monitor::generate_alert(window.index, &raw, config, &state)?;
            state = next;
            (Some(raw), Some(alert))
        };
        windows.push(WindowOutcome {
            window_index: window.index,
            label: window.label.clone(),
            records: window.records.len(),
            raw,
            alert,
        });
    }
    Ok(ScenarioRun {
        scenario: spec.kind,
        windows,
        final_state: state,
        manifest: RunManifest {
            scenario: spec.kind,
            sigma_schedule: spec.sigma_schedule.clone(),
            flip_schedule: spec.flip_schedule.clone(),
            target_features: spec.target_features.clone(),
            noise_seed: spec.noise_seed,
            flip_seed: spec.flip_seed,
            rng_algorithm: RNG_ALGORITHM.to_string(),
            injection: application.windows,
            config_sha256: report::config_hash(config),
            dataset: report::fingerprint(dataset),
        },
    })
}

/// The label-free metrics of one window, flattened for comparison.
fn metric_items(outcome: &WindowOutcome) -> Option<Vec<(String, Scalar)>> {
    let raw = outcome.raw.as_ref()?;
    let mut items = vec![
        ("score_psi".to_string(), raw.score_psi),
        (
            "feature_psi_aggregate".to_string(),
            raw.feature_psi_aggregate,
        ),
        ("entropy".to_string(), raw.entropy),
        ("confidence_ks".to_string(), raw.confidence_ks),
    ];
    for (name, value) in &raw.feature_psi_per_feature {
        items.push((format!("feature_psi[{name}]"), *value));
    }
    if let Some(alert) = &outcome.alert {
        items.push(("composite".to_string(), alert.composite));
    }
    Some(items)
}

/// Element-wise `injected − baseline` per window and metric.
pub fn compute_deltas(
    injected: &ScenarioRun,
    baseline: &ScenarioRun,
) -> Result<DeltaReport, HarnessError> {
    if injected.windows.len() != baseline.windows.len() {
        return Err(HarnessError::WindowCountMismatch {
            a: injected.windows.len(),
            b: baseline.windows.len(),
        });
    }
    let mut rows = Vec::with_capacity(injected.windows.len());
    let mut ranges: MetricRanges = BTreeMap::new();
    for (wi, wb) in injected.windows.iter().zip(&baseline.windows) {
        let row = match (&wi.raw, &wb.raw, &wi.alert, &wb.alert) {
            (Some(ri), Some(rb), Some(ai), Some(ab)) => Some(DeltaRow {
                window_index: wi.window_index,
                score_psi: ri.score_psi - rb.score_psi,
                feature_psi_aggregate: ri.feature_psi_aggregate - rb.feature_psi_aggregate,
                entropy: ri.entropy - rb.entropy,
                confidence_ks: ri.confidence_ks - rb.confidence_ks,
                composite: ai.composite - ab.composite,
            }),
            _ => None,
        };
        if let Some(r) = row {
            for (name, value) in [
                ("score_psi", r.score_psi),
                ("feature_psi_aggregate", r.feature_psi_aggregate),
                ("entropy", r.entropy),
                ("confidence_ks", r.confidence_ks),
                ("composite", r.composite),
            ] {
                ranges
                    .entry(name.to_string())
                    .and_modify(|(lo, hi)| {
                        *lo = lo.min(value);
                        *hi = hi.max(value);
                    })
                    .or_insert((value, value));
            }
        }
        rows.push(row);
    }
    Ok(DeltaReport {
        scenario: injected.scenario,
        rows,
        ranges,
    })
}

fn compare_runs(check: &str, a: &ScenarioRun, b: &ScenarioRun) -> VerificationResult {
    let mut pass = a.windows.len() == b.windows.len();
    let mut max_discrepancy: Scalar = 0.0;
    let mut windows = Vec::new();
    for (wa, wb) in a.windows.iter().zip(&b.windows) {
        let discrepancy = match (metric_items(wa), metric_items(wb)) {
            (None, None) => 0.0,
            (Some(ia), Some(ib)) => {
                if ia.len() != ib.len() || ia.iter().zip(&ib).any(|((na, _), (nb, _))| na != nb) {
                    pass = false;
                    Scalar::INFINITY
                } else {
                    ia.iter()
                        .zip(&ib)
                        .map(|((_, va), (_, vb))| (va - vb).abs())
                        .fold(0.0, Scalar::max)
                }
            }
            // One side absent, the other present: structural mismatch.
            _ => {
                pass = false;
                Scalar::INFINITY
            }
        };
        if discrepancy != 0.0 {
            pass = false;
        }
        max_discrepancy = max_discrepancy.max(discrepancy);
        windows.push(WindowDiscrepancy {
            window_index: wa.window_index,
            discrepancy,
        });
    }
    VerificationResult {
        check: check.to_string(),
        pass,
        max_discrepancy,
        windows,
    }
}

/// Verify that covariate and mixed runs (sharing a noise seed) agree on
/// every label-free metric in every window, to full precision.
pub fn verify_label_blindness(covariate: &ScenarioRun, mixed: &ScenarioRun) -> VerificationResult {
    compare_runs("label_blindness", covariate, mixed)
}

/// Verify that a pure-concept run is metric-identical to baseline: the
/// structural blind spot of label-free monitoring.
pub fn verify_pure_concept_blindspot(
    pure: &ScenarioRun,
    baseline: &ScenarioRun,
) -> VerificationResult {
    compare_runs("pure_concept_blindspot", pure, baseline)
}

/// Options for a full evaluation.
#[derive(Debug, Clone)]
pub struct EvaluationOptions {
    pub monitor_config: MonitorConfig,
    pub profile_options: ProfileOptions,
    pub fit_options: FitOptions,
    /// Features receiving injection noise; defaults to the credit targets.
    pub target_features: Vec<String>,
    pub noise_seed: u64,
    pub flip_seed: u64,
}

impl Default for EvaluationOptions {
    fn default() -> Self {
        Self {
            monitor_config: MonitorConfig::default(),
            profile_options: ProfileOptions::default(),
            fit_options: FitOptions::default(),
            target_features: inject::DEFAULT_TARGET_FEATURES
                .iter()
                .map(|s| s.to_string())
                .collect(),
            noise_seed: 0,
            flip_seed: 1,
        }
    }
}

/// Everything a full evaluation produces.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub report: ReportDocument,
    pub profile: ReferenceProfile,
}

/// Run the full four-scenario evaluation over a prepared dataset: fit the
/// reference scorer, freeze the profile, run baseline / covariate / mixed /
/// pure-concept, compute deltas and the two structural verifications.
pub fn run_evaluation(
    prepared: &PreparedDataset,
    options: &EvaluationOptions,
) -> Result<Evaluation, HarnessError> {
    options.monitor_config.validate()?;
    let dataset = &prepared.dataset;
    let scorer = refmodel::fit_reference(
        &dataset.windows[0].records,
        &dataset.feature_names,
        &options.fit_options,
    )?;
    let profile = proxies::build_reference_profile(
        &dataset.windows[0].records,
        &dataset.feature_names,
        scorer,
        &dataset.feature_names.clone(),
        options.profile_options.clone(),
    )?;

    let n = dataset.monitoring_count();
    let spec_for = |kind: ScenarioKind| {
        inject::scenario_schedule(kind, n)
            .with_target_features(&options.target_features)
            .with_seeds(options.noise_seed, options.flip_seed)
    };
    let baseline = run_scenario(
        dataset,
        &spec_for(ScenarioKind::Baseline),
        &profile,
        &options.monitor_config,
    )?;
    let covariate = run_scenario(
        dataset,
        &spec_for(ScenarioKind::Covariate),
        &profile,
        &options.monitor_config,
    )?;
    let mixed = run_scenario(
        dataset,
        &spec_for(ScenarioKind::Mixed),
        &profile,
        &options.monitor_config,
    )?;
    let pure = run_scenario(
        dataset,
        &spec_for(ScenarioKind::PureConcept),
        &profile,
        &options.monitor_config,
    )?;

    let deltas = vec![
        compute_deltas(&covariate, &baseline)?,
        compute_deltas(&mixed, &baseline)?,
        compute_deltas(&pure, &baseline)?,
    ];
    let verifications = vec![
        verify_label_blindness(&covariate, &mixed),
        verify_pure_concept_blindspot(&pure, &baseline),
    ];

    let report = ReportDocument {
        schema_version: report::REPORT_SCHEMA_VERSION,
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        dataset: report::fingerprint(dataset),
        monitor_config: options.monitor_config.clone(),
        config_sha256: report::config_hash(&options.monitor_config),
        seeds: Seeds {
            noise: options.noise_seed,
            flip: options.flip_seed,
        },
        runs: vec![baseline, covariate, mixed, pure],
        deltas,
        verifications,
    };
    Ok(Evaluation { report, profile })
}

/// Build the profile document for the `profile` CLI stage: fit, freeze,
/// and bundle the mapping and policy so monitoring can run self-contained.
pub fn build_profile_document(
    prepared: &PreparedDataset,
    mapping: &ingest::SchemaMapping,
    fit_options: &FitOptions,
    profile_options: ProfileOptions,
) -> Result<ProfileDocument, HarnessError> {
    let dataset = &prepared.dataset;
    let scorer = refmodel::fit_reference(
        &dataset.windows[0].records,
        &dataset.feature_names,
        fit_options,
    )?;
    let profile = proxies::build_reference_profile(
        &dataset.windows[0].records,
        &dataset.feature_names,
        scorer,
        &dataset.feature_names.clone(),
        profile_options,
    )?;
    Ok(ProfileDocument::new(
        mapping.clone(),
        dataset.policy,
        prepared.imputation_means.clone(),
        profile,
    ))
}

/// Monitor a prepared dataset against a frozen profile document: one alert
/// per non-empty window, cumulative state folded in window order. All
/// windows are monitoring windows here; the reference lives in the profile.
pub fn monitor_windows(
    dataset: &WindowedDataset,
    profile: &ReferenceProfile,
    config: &MonitorConfig,
) -> Result<Vec<GovernanceAlert>, HarnessError> {
    config.validate()?;
    let mut state = CumulativeState::default();
    let mut alerts = Vec::new();
    for window in &dataset.windows {
        if window.records.is_empty() {
            continue;
        }
        let raw =
            proxies::compute_window_metrics(profile, &window.records, &dataset.feature_names)?;
        let (alert, next) = monitor::generate_alert(window.index, &raw, config, &state)?;
        state = next;
        alerts.push(alert);
    }
    Ok(alerts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{self, SynthConfig};

    fn prepared(records: usize, years: usize, seed: u64) -> PreparedDataset {
        let batch = synth::generate(&SynthConfig {
            records,
            years,
            seed,
            start_year: 2008,
        });
        prepare_dataset(&batch, WindowPolicy::CalendarYear).unwrap()
    }

    #[test]
    fn stationary_baseline_stays_quiet_outside_entropy() {
        let prepared = prepared(4000, 4, 11);
        let evaluation = run_evaluation(&prepared, &EvaluationOptions::default()).unwrap();
        let baseline = &evaluation.report.runs[0];
        for w in &baseline.windows {
            let raw = w.raw.as_ref().unwrap();
            assert!(raw.score_psi < 0.05, "score psi {}", raw.score_psi);
            assert!(raw.feature_psi_aggregate < 0.05);
            assert!(raw.confidence_ks < 0.1);
            let alert = w.alert.as_ref().unwrap();
            for kind in &alert.triggered.0 {
                assert_eq!(*kind, crate::monitor::ProxyKind::Entropy);
            }
        }
    }

    #[test]
    fn label_blindness_holds_on_synthetic_data() {
        let prepared = prepared(3000, 4, 23);
        let evaluation = run_evaluation(&prepared, &EvaluationOptions::default()).unwrap();
        let verification = &evaluation.report.verifications[0];
        assert!(verification.pass, "{verification:?}");
        assert_eq!(verification.max_discrepancy, 0.0);
    }

    #[test]
    fn pure_concept_run_matches_baseline_exactly() {
        let prepared = prepared(3000, 4, 37);
        let evaluation = run_evaluation(&prepared, &EvaluationOptions::default()).unwrap();
        let verification = &evaluation.report.verifications[1];
        assert!(verification.pass, "{verification:?}");
        assert_eq!(verification.max_discrepancy, 0.0);
        // The stronger statement: raw values equal window-for-window.
        let baseline = &evaluation.report.runs[0];
        let pure = &evaluation.report.runs[3];
        for (wb, wp) in baseline.windows.iter().zip(&pure.windows) {
            assert_eq!(wb.raw, wp.raw);
        }
    }

    #[test]
    fn mismatched_noise_seeds_fail_label_blindness() {
        let prepared = prepared(2500, 4, 41);
        let options = EvaluationOptions::default();
        let evaluation = run_evaluation(&prepared, &options).unwrap();
        let covariate = &evaluation.report.runs[1];

        let n = prepared.dataset.monitoring_count();
        let other_spec = inject::scenario_schedule(ScenarioKind::Mixed, n)
            .with_target_features(&options.target_features)
            .with_seeds(options.noise_seed + 1, options.flip_seed);
        let mixed_other = run_scenario(
            &prepared.dataset,
            &other_spec,
            &evaluation.profile,
            &options.monitor_config,
        )
        .unwrap();
        let verification = verify_label_blindness(covariate, &mixed_other);
        assert!(!verification.pass);
        assert!(verification.max_discrepancy > 0.0);
    }

    #[test]
    fn run_compared_to_itself_passes_with_zero_discrepancy() {
        let prepared = prepared(2000, 3, 43);
        let evaluation = run_evaluation(&prepared, &EvaluationOptions::default()).unwrap();
        let covariate = &evaluation.report.runs[1];
        let verification = compare_runs("reflexive", covariate, covariate);
        assert!(verification.pass);
        assert_eq!(verification.max_discrepancy, 0.0);
    }

    #[test]
    fn mixed_against_baseline_fails_the_blindspot_check() {
        // The covariate component of mixed drift is visible, so comparing
        // mixed to baseline must show a discrepancy once sigma > 0.
        let prepared = prepared(2500, 4, 44);
        let evaluation = run_evaluation(&prepared, &EvaluationOptions::default()).unwrap();
        let baseline = &evaluation.report.runs[0];
        let mixed = &evaluation.report.runs[2];
        let verification = verify_pure_concept_blindspot(mixed, baseline);
        assert!(!verification.pass);
        assert!(verification.max_discrepancy > 0.0);
    }

    #[test]
    fn delta_of_run_minus_itself_is_exactly_zero() {
        let prepared = prepared(2000, 3, 47);
        let evaluation = run_evaluation(&prepared, &EvaluationOptions::default()).unwrap();
        let baseline = &evaluation.report.runs[0];
        let delta = compute_deltas(baseline, baseline).unwrap();
        for row in delta.rows.iter().flatten() {
            assert_eq!(row.score_psi, 0.0);
            assert_eq!(row.feature_psi_aggregate, 0.0);
            assert_eq!(row.entropy, 0.0);
            assert_eq!(row.confidence_ks, 0.0);
            assert_eq!(row.composite, 0.0);
        }
        assert_eq!(delta.ranges["score_psi"], (0.0, 0.0));
    }

    #[test]
    fn pure_minus_baseline_deltas_are_exactly_zero() {
        let prepared = prepared(2500, 4, 53);
        let evaluation = run_evaluation(&prepared, &EvaluationOptions::default()).unwrap();
        let pure_delta = &evaluation.report.deltas[2];
        assert_eq!(pure_delta.scenario, ScenarioKind::PureConcept);
        for row in pure_delta.rows.iter().flatten() {
            assert_eq!(row.score_psi, 0.0);
            assert_eq!(row.feature_psi_aggregate, 0.0);
            assert_eq!(row.entropy, 0.0);
            assert_eq!(row.confidence_ks, 0.0);
            assert_eq!(row.composite, 0.0);
        }
    }

    #[test]
    fn covariate_feature_psi_delta_grows_with_sigma() {
        let prepared = prepared(6000, 6, 59);
        let evaluation = run_evaluation(&prepared, &EvaluationOptions::default()).unwrap();
        let delta = &evaluation.report.deltas[0];
        let values: Vec<Scalar> = delta
            .rows
            .iter()
            .flatten()
            .map(|r| r.feature_psi_aggregate)
            .collect();
        assert_eq!(values.len(), 5);
        // Ramp plus plateau: expect a broadly increasing trend.
        assert!(values[4] > values[0], "{values:?}");
        assert!(
            values[4] > 0.2,
            "plateau delta should be material: {values:?}"
        );
    }

    #[test]
    fn window_count_mismatch_is_detected() {
        let prepared_a = prepared(1500, 3, 61);
        let prepared_b = prepared(1500, 4, 61);
        let eval_a = run_evaluation(&prepared_a, &EvaluationOptions::default()).unwrap();
        let eval_b = run_evaluation(&prepared_b, &EvaluationOptions::default()).unwrap();
        let err = compute_deltas(&eval_a.report.runs[0], &eval_b.report.runs[0]).unwrap_err();
        assert!(matches!(err, HarnessError::WindowCountMismatch { .. }));
    }

    #[test]
    fn evaluation_report_bytes_are_deterministic() {
        let prepared = prepared(2000, 3, 67);
        let options = EvaluationOptions::default();
        let a = run_evaluation(&prepared, &options).unwrap();
        let b = run_evaluation(&prepared, &options).unwrap();
        assert_eq!(a.report.to_json_bytes(), b.report.to_json_bytes());
    }

    #[test]
    fn empty_interior_windows_produce_absent_outcomes() {
        use crate::ingest::{DecisionRecord, RecordBatch};
        use chrono::NaiveDate;
        let mut state = 0xabcdefu64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        // Years 2010 and 2012 populated; 2011 empty.
        let mut records = Vec::new();
        for &year in &[2010, 2010, 2012] {
            for i in 0..40 {
                let date = NaiveDate::from_ymd_opt(year, 1 + (i % 12) as u32, 5)
                    .unwrap()
                    .and_hms_opt(i as u32 % 24, 0, 0)
                    .unwrap();
                records.push(DecisionRecord::new(
                    date,
                    vec![next() * 10.0, next() * 5.0],
                    Some(u8::from(next() > 0.5)),
                ));
            }
        }
        let batch = RecordBatch {
            feature_names: vec!["a".into(), "b".into()],
            records,
        };
        let prepared = prepare_dataset(&batch, WindowPolicy::CalendarYear).unwrap();
        let options = EvaluationOptions {
            target_features: vec!["a".into()],
            ..EvaluationOptions::default()
        };
        let evaluation = run_evaluation(&prepared, &options).unwrap();
        let baseline = &evaluation.report.runs[0];
        assert_eq!(baseline.windows.len(), 2);
        let empty = &baseline.windows[0];
        assert_eq!(empty.records, 0);
        assert!(empty.raw.is_none());
        assert!(empty.alert.is_none());
        let populated = &baseline.windows[1];
        assert!(populated.raw.is_some());
        // The cumulative fold skipped the empty window.
        assert_eq!(baseline.final_state.history.len(), 1);
    }
}
