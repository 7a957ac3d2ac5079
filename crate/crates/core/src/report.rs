//! Report assembly: dataset fingerprints, the versioned JSON evaluation
//! report, and flat CSV table emission.
//!
//! Report bodies are deterministic: maps are ordered, no wall-clock
//! timestamps enter the document, and identical inputs and seeds reproduce
//! byte-identical files.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::harness::{DeltaReport, ScenarioRun, VerificationResult};
use crate::ingest::{SchemaMapping, WindowedDataset};
use crate::inject::{ScenarioSpec, WindowInjection};
use crate::monitor::MonitorConfig;
use crate::Scalar;

/// Report document schema version.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Identity of the evaluated dataset, for auditing published numbers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetFingerprint {
    pub records: usize,
    pub start: NaiveDateTime,
    pub end: NaiveDateTime,
    pub content_sha256: String,
}

/// Fingerprint a windowed dataset: row count, time range, content hash over
/// the canonical window/record order.
pub fn fingerprint(dataset: &WindowedDataset) -> DatasetFingerprint {
    let mut hasher = Sha256::new();
    hasher.update(b"driftgov.dataset.v1");
    let mut records = 0usize;
    let mut start: Option<NaiveDateTime> = None;
    let mut end: Option<NaiveDateTime> = None;
    for window in &dataset.windows {
        hasher.update((window.index as u64).to_le_bytes());
        hasher.update((window.records.len() as u64).to_le_bytes());
        for record in &window.records {
            hasher.update(record.id.as_bytes());
            records += 1;
            let t = record.timestamp;
            start = Some(start.map_or(t, |s| s.min(t)));
            end = Some(end.map_or(t, |e| e.max(t)));
        }
    }
    let fallback = dataset.windows.first().map(|w| w.start).unwrap_or_default();
    DatasetFingerprint {
        records,
        start: start.unwrap_or(fallback),
        end: end.unwrap_or(fallback),
        content_sha256: hex::encode(hasher.finalize()),
    }
}

/// Hash of the monitoring configuration as canonical JSON.
pub fn config_hash(config: &MonitorConfig) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    let mut hasher = Sha256::new();
    hasher.update(b"driftgov.config.v1");
    hasher.update(&bytes);
    hex::encode(hasher.finalize())
}

/// Seeds used by an evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub noise: u64,
    pub flip: u64,
}

/// The full evaluation report: four scenario runs, delta tables against
/// baseline, and the structural verification results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub toolkit_version: String,
    pub dataset: DatasetFingerprint,
    pub monitor_config: MonitorConfig,
    pub config_sha256: String,
    pub seeds: Seeds,
    pub runs: Vec<ScenarioRun>,
    pub deltas: Vec<DeltaReport>,
    pub verifications: Vec<VerificationResult>,
}

impl ReportDocument {
    /// Serialized report body; deterministic for identical inputs.
    pub fn to_json_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("report serializes");
        bytes.push(b'\n');
        bytes
    }

    pub fn write_json(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_json_bytes())
    }

    pub fn all_verifications_pass(&self) -> bool {
        self.verifications.iter().all(|v| v.pass)
    }
}

/// Write the flat CSV tables mirroring the report: one per-window metrics
/// table per scenario, one delta table per injected scenario, and the
/// verification summary.
pub fn write_csv_tables(doc: &ReportDocument, dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for run in &doc.runs {
        let mut file =
            std::fs::File::create(dir.join(format!("metrics_{}.csv", run.scenario.name())))?;
        writeln!(
            file,
            "window,label,records,score_psi,feat_psi,entropy,conf_ks,composite,severity,wealth,alert_active"
        )?;
        for w in &run.windows {
            let (score, feat, entropy, ks) = match &w.raw {
                Some(raw) => (
                    raw.score_psi.to_string(),
                    raw.feature_psi_aggregate.to_string(),
                    raw.entropy.to_string(),
                    raw.confidence_ks.to_string(),
                ),
                None => Default::default(),
            };
            let (composite, severity, wealth, active) = match &w.alert {
                Some(alert) => (
                    alert.composite.to_string(),
                    alert.severity.to_string(),
                    alert.cumulative_wealth.to_string(),
                    alert.cumulative_alert_active.to_string(),
                ),
                None => Default::default(),
            };
            writeln!(
                file,
                "{},{},{},{score},{feat},{entropy},{ks},{composite},{severity},{wealth},{active}",
                w.window_index, w.label, w.records
            )?;
        }
    }
    for delta in &doc.deltas {
        let mut file =
            std::fs::File::create(dir.join(format!("deltas_{}.csv", delta.scenario.name())))?;
        writeln!(
            file,
            "window,score_psi_delta,feat_psi_delta,entropy_delta,conf_ks_delta,composite_delta"
        )?;
        for r in delta.rows.iter().flatten() {
            writeln!(
                file,
                "{},{},{},{},{},{}",
                r.window_index,
                r.score_psi,
                r.feature_psi_aggregate,
                r.entropy,
                r.confidence_ks,
                r.composite
            )?
        }
        writeln!(
            file,
            "# ranges,{},{},{},{},{}",
            range_cell(delta.ranges.get("score_psi")),
            range_cell(delta.ranges.get("feature_psi_aggregate")),
            range_cell(delta.ranges.get("entropy")),
            range_cell(delta.ranges.get("confidence_ks")),
            range_cell(delta.ranges.get("composite")),
        )?;
    }
    let mut file = std::fs::File::create(dir.join("verifications.csv"))?;
    writeln!(file, "check,pass,max_discrepancy")?;
    for v in &doc.verifications {
        writeln!(file, "{},{},{}", v.check, v.pass, v.max_discrepancy)?;
    }
    Ok(())
}

fn range_cell(range: Option<&(Scalar, Scalar)>) -> String {
    match range {
        Some((lo, hi)) => format!("{lo}..{hi}"),
        None => String::new(),
    }
}

/// Audit manifest emitted alongside an injected dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectionManifest {
    pub schema_version: u32,
    pub spec: ScenarioSpec,
    pub rng_algorithm: String,
    pub windows: Vec<WindowInjection>,
    pub source: DatasetFingerprint,
    /// Mapping that re-ingests the emitted file (labels are written 0/1).
    pub emitted_mapping: SchemaMapping,
}

/// Per-metric (min, max) ranges keyed by metric name.
pub type MetricRanges = BTreeMap<String, (Scalar, Scalar)>;
