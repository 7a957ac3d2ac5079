//! Acceptance suite: one test per shipping criterion, each printing a
//! single pass/fail line (visible with `cargo test -- --nocapture`).
//!
//! The structural criteria (label blindness, pure-concept blind spot) run
//! over randomized synthetic datasets because they are consequences of the
//! architecture, not facts about any particular dataset.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use driftgov::harness::{self, EvaluationOptions};
use driftgov::ingest::WindowPolicy;
use driftgov::metrics::{self, BinProfile};
use driftgov::monitor::{self, CumulativeState, MonitorConfig, ProxyKind, Severity, TriggerSet};
use driftgov::proxies::RawProxyValues;
use driftgov::report::ReportDocument;
use driftgov::synth::{self, SynthConfig};

fn criterion(name: &str, body: impl FnOnce() -> Result<(), String>) {
    match body() {
        Ok(()) => println!("acceptance {name}: PASS"),
        Err(message) => {
            println!("acceptance {name}: FAIL — {message}");
            panic!("acceptance {name} failed: {message}");
        }
    }
}

fn check(condition: bool, message: impl Into<String>) -> Result<(), String> {
    if condition {
        Ok(())
    } else {
        Err(message.into())
    }
}

/// Criterion 1: the published raw metric rows reproduce the composite and
/// severity columns through default thresholds and weights.
#[test]
fn criterion_1_composite_golden() {
    criterion("1 composite-golden", || {
        let fixture = std::fs::read_to_string(
            Path::new(env!("CARGO_MANIFEST_DIR"))
                .join("tests/fixtures/credit_baseline_raw_metrics.csv"),
        )
        .map_err(|e| e.to_string())?;
        let config = MonitorConfig::default();
        let mut rows = 0usize;
        for line in fixture.lines().skip(1) {
            let cells: Vec<&str> = line.split(',').collect();
            check(cells.len() == 7, format!("fixture row malformed: {line}"))?;
            let parse = |i: usize| -> Result<f64, String> {
                cells[i]
                    .parse()
                    .map_err(|_| format!("bad number in {line}"))
            };
            let raw = RawProxyValues {
                score_psi: parse(1)?,
                feature_psi_per_feature: BTreeMap::new(),
                feature_psi_aggregate: parse(2)?,
                entropy: parse(3)?,
                confidence_ks: parse(4)?,
            };
            let want_composite = parse(5)?;
            let want_severity = cells[6].trim();

            let triggers = monitor::evaluate_triggers(&raw, &config);
            let composite = monitor::composite_score(&triggers, &ProxyKind::ALL, &config).unwrap();
            let severity = monitor::assign_severity(composite, &triggers, &config);
            check(
                (composite - want_composite).abs() < 1e-3,
                format!(
                    "window {}: composite {composite} differs from {want_composite}",
                    cells[0]
                ),
            )?;
            check(
                severity.to_string() == want_severity,
                format!(
                    "window {}: severity {severity} differs from {want_severity}",
                    cells[0]
                ),
            )?;
            rows += 1;
        }
        check(
            rows == 10,
            format!("expected 10 fixture rows, found {rows}"),
        )
    });
}

/// Criterion 2: folding the exact composite column through the cumulative
/// update with defaults reproduces the published final wealth and crosses
/// the alert threshold.
#[test]
fn criterion_2_cumulative_score() {
    criterion("2 cumulative-score", || {
        let config = MonitorConfig::default();
        let composites = [
            7.0 / 12.0,
            7.0 / 12.0,
            5.0 / 6.0,
            1.0,
            1.0,
            1.0,
            1.0,
            1.0,
            1.0,
            1.0,
        ];
        let mut state = CumulativeState::default();
        let mut crossed_at = None;
        for (i, &c) in composites.iter().enumerate() {
            state = monitor::update_cumulative(&state, c, &config);
            if crossed_at.is_none() && state.wealth >= config.alert_wealth_threshold {
                crossed_at = Some(i);
            }
        }
        check(
            (state.wealth - 26.74).abs() <= 0.05,
            format!("final wealth {} outside 26.74 ± 0.05", state.wealth),
        )?;
        check(
            crossed_at.is_some(),
            format!("wealth never crossed {}", config.alert_wealth_threshold),
        )?;
        check(state.alert_active, "alert not active at the final window")?;
        Ok(())
    });
}

const STRUCTURAL_DATASETS: usize = 20;

/// One four-scenario evaluation per randomized synthetic dataset, shared by
/// criteria 3 and 4.
fn structural_reports() -> &'static (Vec<ReportDocument>, Duration) {
    static REPORTS: OnceLock<(Vec<ReportDocument>, Duration)> = OnceLock::new();
    REPORTS.get_or_init(|| {
        let started = Instant::now();
        let mut reports = Vec::with_capacity(STRUCTURAL_DATASETS);
        for i in 0..STRUCTURAL_DATASETS as u64 {
            let batch = synth::generate(&SynthConfig {
                records: 5_000 + (i as usize * 37) % 500,
                years: 4 + (i as usize % 3),
                seed: 100 + i,
                start_year: 2008,
            });
            let prepared = harness::prepare_dataset(&batch, WindowPolicy::CalendarYear).unwrap();
            let options = EvaluationOptions {
                noise_seed: 1_000 + i,
                flip_seed: 2_000 + i,
                ..EvaluationOptions::default()
            };
            let evaluation = harness::run_evaluation(&prepared, &options).unwrap();
            reports.push(evaluation.report);
        }
        (reports, started.elapsed())
    })
}

/// Criterion 3: covariate and mixed runs sharing a noise seed produce
/// identical label-free metrics in every window, exactly, on ≥20 randomized
/// datasets, within the runtime budget.
#[test]
fn criterion_3_label_blindness() {
    criterion("3 label-blindness", || {
        let (reports, elapsed) = structural_reports();
        check(
            reports.len() >= 20,
            format!("only {} datasets evaluated", reports.len()),
        )?;
        for (i, report) in reports.iter().enumerate() {
            check(
                report.dataset.records >= 5_000,
                format!("dataset {i} has {} records", report.dataset.records),
            )?;
            let windows = report.runs[0].windows.len() + 1;
            check(windows >= 4, format!("dataset {i} has {windows} windows"))?;
            let v = &report.verifications[0];
            check(v.check == "label_blindness", "wrong verification order")?;
            check(
                v.pass && v.max_discrepancy == 0.0,
                format!(
                    "dataset {i}: label blindness discrepancy {}",
                    v.max_discrepancy
                ),
            )?;
        }
        check(
            *elapsed < Duration::from_secs(60),
            format!("structural runs took {elapsed:?}, over the 1-minute budget"),
        )?;
        println!("  ({} datasets evaluated in {elapsed:?})", reports.len());
        Ok(())
    });
}

/// Criterion 4: pure-concept runs match baseline exactly — δ = 0 in every
/// window and metric — on the same randomized datasets.
#[test]
fn criterion_4_pure_concept_blindspot() {
    criterion("4 pure-concept-blindspot", || {
        let (reports, _) = structural_reports();
        for (i, report) in reports.iter().enumerate() {
            let v = &report.verifications[1];
            check(
                v.check == "pure_concept_blindspot",
                "wrong verification order",
            )?;
            check(
                v.pass && v.max_discrepancy == 0.0,
                format!("dataset {i}: blind spot discrepancy {}", v.max_discrepancy),
            )?;
            // The delta table must agree: exactly zero everywhere.
            let pure_delta = &report.deltas[2];
            for row in pure_delta.rows.iter().flatten() {
                let zeros = row.score_psi == 0.0
                    && row.feature_psi_aggregate == 0.0
                    && row.entropy == 0.0
                    && row.confidence_ks == 0.0
                    && row.composite == 0.0;
                check(
                    zeros,
                    format!(
                        "dataset {i} window {}: nonzero pure delta",
                        row.window_index
                    ),
                )?;
            }
        }
        Ok(())
    });
}

/// Small deterministic generator, independent of the crate's RNG stack.
struct XorShift(u64);

impl XorShift {
    fn next_u64(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0
    }

    fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

mod oracle {
    //! Brute-force metric implementations, coded independently of the
    //! library (linear scans and direct formula evaluation only).

    pub fn psi_pairs(p: &[f64], q: &[f64], floor: f64) -> f64 {
        let mut total = 0.0;
        for k in 0..p.len() {
            let a = if p[k] < floor { floor } else { p[k] };
            let b = if q[k] < floor { floor } else { q[k] };
            total += (a - b) * (a / b).ln();
        }
        total
    }

    /// PSI of a sample against reference edges/proportions, recounting the
    /// sample per bin by linear scan (right-closed bins).
    pub fn psi_sample(edges: &[f64], ref_props: &[f64], sample: &[f64]) -> f64 {
        let mut counts = vec![0usize; edges.len() + 1];
        for &v in sample {
            let mut bin = 0;
            for &e in edges {
                if v > e {
                    bin += 1;
                }
            }
            counts[bin] += 1;
        }
        let q: Vec<f64> = counts
            .iter()
            .map(|&c| c as f64 / sample.len() as f64)
            .collect();
        psi_pairs(ref_props, &q, 1e-6)
    }

    pub fn ks(a: &[f64], b: &[f64]) -> f64 {
        let ecdf =
            |s: &[f64], t: f64| s.iter().filter(|&&v| v <= t).count() as f64 / s.len() as f64;
        let mut sup: f64 = 0.0;
        for &t in a.iter().chain(b) {
            sup = sup.max((ecdf(a, t) - ecdf(b, t)).abs());
        }
        sup
    }

    pub fn entropy(scores: &[f64]) -> f64 {
        let mut total = 0.0;
        for &p in scores {
            let p = p.clamp(1e-12, 1.0 - 1e-12);
            total -= (p * p.ln() + (1.0 - p) * (1.0 - p).ln()) / std::f64::consts::LN_2;
        }
        total / scores.len() as f64
    }
}

/// Criterion 5: PSI, KS and normalized entropy agree with the brute-force
/// oracles to 1e-9 on 1,000 random small samples each, degenerate cases
/// included.
#[test]
fn criterion_5_metric_oracles() {
    criterion("5 metric-oracles", || {
        let tol = 1e-9;
        let mut rng = XorShift(0x5eed_cafe_f00d_0001);

        for case in 0..1_000 {
            // PSI through a quantile profile built from a tie-heavy sample;
            // small bin counts force empty and collapsed bins.
            let ref_len = 5 + rng.below(75);
            let reference: Vec<f64> = (0..ref_len)
                .map(|_| (rng.below(25) as f64 - 12.0) / 4.0)
                .collect();
            let bins = 2 + rng.below(10);
            let profile = BinProfile::from_sample(&reference, bins).unwrap();
            let cur_len = 1 + rng.below(75);
            let current: Vec<f64> = (0..cur_len)
                .map(|_| (rng.below(40) as f64 - 20.0) / 4.0)
                .collect();
            let got = metrics::psi(&profile, &current).unwrap();
            let want = oracle::psi_sample(&profile.edges, &profile.proportions, &current);
            check(
                (got - want).abs() < tol && got >= 0.0,
                format!("psi case {case}: {got} vs oracle {want}"),
            )?;
        }

        for case in 0..1_000 {
            // KS over integer-grid samples: ties everywhere.
            let n = 1 + rng.below(50);
            let m = 1 + rng.below(50);
            let a: Vec<f64> = (0..n).map(|_| rng.below(12) as f64 / 3.0).collect();
            let b: Vec<f64> = (0..m).map(|_| rng.below(12) as f64 / 3.0).collect();
            let got = metrics::ks_statistic(&a, &b).unwrap();
            let want = oracle::ks(&a, &b);
            check(
                (got - want).abs() < tol,
                format!("ks case {case}: {got} vs oracle {want}"),
            )?;
        }

        for case in 0..1_000 {
            // Entropy with mass at the exact endpoints.
            let n = 1 + rng.below(50);
            let scores: Vec<f64> = (0..n)
                .map(|_| match rng.below(5) {
                    0 => 0.0,
                    1 => 1.0,
                    _ => rng.unit(),
                })
                .collect();
            let got = metrics::normalized_entropy(&scores).unwrap();
            let want = oracle::entropy(&scores);
            check(
                (got - want).abs() < tol,
                format!("entropy case {case}: {got} vs oracle {want}"),
            )?;
        }
        Ok(())
    });
}

/// Criterion 6: the hand-derived metric values.
#[test]
fn criterion_6_hand_derived_values() {
    criterion("6 hand-derived-values", || {
        let psi: f64 = metrics::psi_from_proportions(&[0.5, 0.5], &[0.25, 0.75], 1e-6);
        check(
            (psi - 0.274653).abs() <= 1e-6,
            format!("psi {psi} differs from 0.274653"),
        )?;
        let ks: f64 = metrics::ks_statistic(&[1.0, 2.0, 3.0, 4.0], &[2.0, 3.0, 4.0, 5.0]).unwrap();
        check(ks == 0.25, format!("ks {ks} differs from exactly 0.25"))?;
        let entropy: f64 = metrics::normalized_entropy(&[0.25; 32]).unwrap();
        check(
            (entropy - 0.811278).abs() <= 1e-6,
            format!("entropy {entropy} differs from 0.811278"),
        )?;
        Ok(())
    });
}

/// Criterion 7: composite monotonicity over all 16 trigger subsets, the
/// boundary values, and severity monotonicity under the default bands.
#[test]
fn criterion_7_composite_monotonicity() {
    criterion("7 composite-monotonicity", || {
        let config = MonitorConfig::default();
        let subset = |mask: u8| -> TriggerSet {
            ProxyKind::ALL
                .into_iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, k)| k)
                .collect()
        };
        let composite = |mask: u8| -> f64 {
            monitor::composite_score(&subset(mask), &ProxyKind::ALL, &config).unwrap()
        };
        for s in 0u8..16 {
            for t in 0u8..16 {
                if s & t == s {
                    check(
                        composite(s) <= composite(t) + 1e-15,
                        format!("composite not monotone: {s:#06b} vs {t:#06b}"),
                    )?;
                }
            }
        }
        check(composite(0) == 0.0, "composite(∅) must be 0")?;
        check(composite(0b1111) == 1.0, "composite(all) must be 1")?;

        let any: TriggerSet = [ProxyKind::Entropy].into_iter().collect();
        let mut prev = Severity::None;
        for step in 0..=1_000 {
            let c = step as f64 / 1_000.0;
            let severity = monitor::assign_severity(c, &any, &config);
            check(
                severity >= prev,
                format!("severity decreased at composite {c}"),
            )?;
            prev = severity;
        }
        Ok(())
    });
}

/// Criterion 8: injected covariate drift is visible — feature PSI delta is
/// non-decreasing over the sigma ramp (one sub-0.02 inversion allowed) and
/// severity is critical by the sigma-2.0 plateau.
#[test]
fn criterion_8_covariate_visibility() {
    criterion("8 covariate-visibility", || {
        let batch = synth::generate(&SynthConfig {
            records: 14_000,
            years: 7,
            seed: 11,
            start_year: 2008,
        });
        let prepared = harness::prepare_dataset(&batch, WindowPolicy::CalendarYear).unwrap();
        let evaluation = harness::run_evaluation(&prepared, &EvaluationOptions::default()).unwrap();
        let report = &evaluation.report;

        let covariate_delta = &report.deltas[0];
        let deltas: Vec<f64> = covariate_delta
            .rows
            .iter()
            .flatten()
            .map(|r| r.feature_psi_aggregate)
            .collect();
        check(
            deltas.len() >= 5,
            format!("only {} delta rows", deltas.len()),
        )?;
        let ramp = &deltas[..5];
        let mut inversions = 0;
        for i in 0..ramp.len() - 1 {
            if ramp[i + 1] < ramp[i] {
                inversions += 1;
                check(
                    ramp[i] - ramp[i + 1] < 0.02,
                    format!("inversion of {} at window {}", ramp[i] - ramp[i + 1], i + 1),
                )?;
            }
        }
        check(
            inversions <= 1,
            format!("{inversions} inversions in the ramp: {ramp:?}"),
        )?;

        let covariate_run = &report.runs[1];
        let plateau_start = 4; // fifth monitoring window: sigma 2.0
        let severity = covariate_run.windows[plateau_start]
            .alert
            .as_ref()
            .map(|a| a.severity);
        check(
            severity == Some(Severity::Critical),
            format!("severity at the plateau is {severity:?}, not critical"),
        )?;
        Ok(())
    });
}

/// Criterion 9: two `evaluate` invocations of the built binary with
/// identical inputs and seeds produce byte-identical report bodies.
#[test]
fn criterion_9_evaluate_determinism() {
    criterion("9 evaluate-determinism", || {
        let bin = env!("CARGO_BIN_EXE_driftgov");
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let path = |name: &str| -> PathBuf { dir.path().join(name) };
        let run = |args: &[&str]| -> Result<(), String> {
            let output = std::process::Command::new(bin)
                .args(args)
                .output()
                .map_err(|e| e.to_string())?;
            check(
                output.status.success(),
                format!(
                    "`{}` failed: {}",
                    args.join(" "),
                    String::from_utf8_lossy(&output.stderr)
                ),
            )
        };

        let data = path("data.csv");
        let schema = path("schema.json");
        run(&[
            "synth",
            "--records",
            "6000",
            "--years",
            "5",
            "--seed",
            "17",
            "--out",
            data.to_str().unwrap(),
            "--schema-out",
            schema.to_str().unwrap(),
        ])?;
        for out in ["first.json", "second.json"] {
            run(&[
                "evaluate",
                "--data",
                data.to_str().unwrap(),
                "--schema",
                schema.to_str().unwrap(),
                "--noise-seed",
                "5",
                "--flip-seed",
                "6",
                "--out",
                path(out).to_str().unwrap(),
            ])?;
        }
        let first = std::fs::read(path("first.json")).map_err(|e| e.to_string())?;
        let second = std::fs::read(path("second.json")).map_err(|e| e.to_string())?;
        check(!first.is_empty(), "report body empty")?;
        check(
            first == second,
            "report bodies differ between identical runs",
        )?;
        Ok(())
    });
}

/// Criterion 10 (declared): published raw metric magnitudes require the
/// external credit dataset; the repository documents the invocation to
/// attempt them, and acceptance does not depend on matching them.
#[test]
fn criterion_10_external_dataset_declared() {
    criterion("10 external-dataset-declared", || {
        let readme_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../README.md");
        let readme =
            std::fs::read_to_string(&readme_path).map_err(|e| format!("README.md missing: {e}"))?;
        check(
            readme.contains("driftgov evaluate"),
            "README must document the evaluate invocation for the external dataset",
        )?;
        check(
            readme.to_lowercase().contains("lending club"),
            "README must name the external dataset the invocation applies to",
        )?;
        println!("  (raw metric magnitudes declared dataset-dependent; not asserted here)");
        Ok(())
    });
}
