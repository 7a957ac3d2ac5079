//! The profile and monitoring stages must be separable through the frozen
//! JSON profile document: monitoring against a reloaded profile has to
//! reproduce in-process results bit for bit.

use driftgov::config::ProfileDocument;
use driftgov::harness::{self, EvaluationOptions};
use driftgov::ingest::WindowPolicy;
use driftgov::logreg::FitOptions;
use driftgov::proxies::{self, ProfileOptions};
use driftgov::synth::{self, SynthConfig};

fn prepared(seed: u64) -> harness::PreparedDataset {
    let batch = synth::generate(&SynthConfig {
        records: 3_000,
        years: 4,
        seed,
        start_year: 2008,
    });
    harness::prepare_dataset(&batch, WindowPolicy::CalendarYear).unwrap()
}

#[test]
fn reloaded_profile_reproduces_metrics_bit_for_bit() {
    let prepared = prepared(5);
    let mapping = synth::canonical_mapping();
    let doc = harness::build_profile_document(
        &prepared,
        &mapping,
        &FitOptions::default(),
        ProfileOptions::default(),
    )
    .unwrap();

    let path = tempfile::Builder::new()
        .suffix(".json")
        .tempfile()
        .unwrap()
        .into_temp_path();
    doc.save(&path).unwrap();
    let reloaded = ProfileDocument::load(&path).unwrap();
    assert_eq!(doc, reloaded);

    let names = &prepared.dataset.feature_names;
    for window in prepared.dataset.monitoring_windows() {
        let direct = proxies::compute_window_metrics(&doc.profile, &window.records, names).unwrap();
        let via_disk =
            proxies::compute_window_metrics(&reloaded.profile, &window.records, names).unwrap();
        assert_eq!(direct, via_disk);
    }
}

#[test]
fn monitoring_with_frozen_means_matches_reference_flow() {
    let prepared = prepared(9);
    let mapping = synth::canonical_mapping();
    let doc = harness::build_profile_document(
        &prepared,
        &mapping,
        &FitOptions::default(),
        ProfileOptions::default(),
    )
    .unwrap();

    // Re-ingest the same records through the monitoring path.
    let batch = synth::generate(&SynthConfig {
        records: 3_000,
        years: 4,
        seed: 9,
        start_year: 2008,
    });
    let dataset = harness::prepare_monitoring_dataset(
        &batch,
        WindowPolicy::CalendarYear,
        &doc.imputation_means,
    )
    .unwrap();
    let alerts = harness::monitor_windows(
        &dataset,
        &doc.profile,
        &EvaluationOptions::default().monitor_config,
    )
    .unwrap();
    assert_eq!(alerts.len(), 4);

    // Window 0 is the profile source: zero divergence, KS zero, entropy own.
    let first = &alerts[0];
    assert_eq!(first.raw.score_psi, 0.0);
    assert_eq!(first.raw.confidence_ks, 0.0);
    assert!(first.raw.entropy > 0.0);

    // Wealth folds sequentially across the emitted alerts.
    let mut wealth = 1.0;
    for alert in &alerts {
        let factor = driftgov::betting::betting_factor(alert.composite, 0.5, 1.0, 0.01);
        wealth *= factor;
        assert_eq!(alert.cumulative_wealth, wealth);
    }
}

#[test]
fn full_evaluation_survives_report_serialization() {
    let prepared = prepared(13);
    let evaluation = harness::run_evaluation(&prepared, &EvaluationOptions::default()).unwrap();
    let bytes = evaluation.report.to_json_bytes();
    let back: driftgov::report::ReportDocument = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(evaluation.report, back);
    assert_eq!(back.to_json_bytes(), bytes);
}
