//! Decision-record ingestion: file loading, schema mapping, imputation and
//! time-window partitioning.
//!
//! Sources are UTF-8 delimited text with a header row, or line-delimited
//! JSON objects. Parsing is forgiving row-by-row (dirty exports are the
//! norm) but trips a hard failure when more than half the rows are
//! unusable, which indicates a wholesale schema mismatch rather than dirt.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

use chrono::{Datelike, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Scalar;

/// Timestamp parsing strategies for the source's timestamp column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimestampFormat {
    /// Try datetime, date, `YYYY-MM` then `Mon-YYYY` in that order.
    #[default]
    Auto,
    /// ISO-8601 date: `YYYY-MM-DD`.
    Date,
    /// ISO-8601 datetime: `YYYY-MM-DDTHH:MM:SS` (space separator accepted).
    DateTime,
    /// Month string: `YYYY-MM`, resolved to the first of the month.
    YearMonth,
    /// Month string: `Dec-2015`, resolved to the first of the month.
    MonthAbbrYear,
}

/// Declared mapping from source columns to the record schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaMapping {
    /// Column holding the decision timestamp.
    pub timestamp_column: String,
    /// Optional column holding the (eventual) binary outcome label.
    #[serde(default)]
    pub label_column: Option<String>,
    /// Ordered list of numeric feature columns to ingest and monitor.
    pub feature_columns: Vec<String>,
    /// Literal label value mapped to 1; anything else non-empty maps to 0.
    #[serde(default = "default_positive")]
    pub label_positive_value: String,
    #[serde(default)]
    pub timestamp_format: TimestampFormat,
    /// Field delimiter for delimited sources.
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
}

fn default_positive() -> String {
    "1".to_string()
}

fn default_delimiter() -> char {
    ','
}

impl SchemaMapping {
    pub fn validate(&self) -> Result<(), IngestError> {
        if self.feature_columns.is_empty() {
            return Err(IngestError::InvalidMapping {
                reason: "feature_columns must be non-empty".into(),
            });
        }
        let mut seen = std::collections::BTreeSet::new();
        for f in &self.feature_columns {
            if !seen.insert(f) {
                return Err(IngestError::InvalidMapping {
                    reason: format!("duplicate feature column `{f}`"),
                });
            }
        }
        if self.feature_columns.contains(&self.timestamp_column) {
            return Err(IngestError::InvalidMapping {
                reason: "timestamp_column listed among feature_columns".into(),
            });
        }
        if let Some(label) = &self.label_column {
            if self.feature_columns.contains(label) {
                return Err(IngestError::InvalidMapping {
                    reason: "label_column listed among feature_columns".into(),
                });
            }
        }
        Ok(())
    }

    fn parse_timestamp(&self, raw: &str) -> Option<NaiveDateTime> {
        parse_timestamp(raw.trim(), self.timestamp_format)
    }
}

fn parse_timestamp(raw: &str, format: TimestampFormat) -> Option<NaiveDateTime> {
    if raw.is_empty() {
        return None;
    }
    let datetime = || {
        NaiveDateTime::parse_from_str(raw, "%Y-%m-%dT%H:%M:%S")
            .or_else(|_| NaiveDateTime::parse_from_str(raw, "%Y-%m-%d %H:%M:%S"))
            .ok()
    };
    let date = || {
        NaiveDate::parse_from_str(raw, "%Y-%m-%d")
            .ok()
            .and_then(|d| d.and_hms_opt(0, 0, 0))
    };
    let year_month = || {
        NaiveDate::parse_from_str(&format!("{raw}-01"), "%Y-%m-%d")
            .ok()
            .and_then(|d| d.and_hms_opt(0, 0, 0))
    };
    let month_abbr = || {
        NaiveDate::parse_from_str(&format!("01-{raw}"), "%d-%b-%Y")
            .ok()
            .and_then(|d| d.and_hms_opt(0, 0, 0))
    };
    match format {
        TimestampFormat::Auto => datetime()
            .or_else(date)
            .or_else(year_month)
            .or_else(month_abbr),
        TimestampFormat::Date => date(),
        TimestampFormat::DateTime => datetime(),
        TimestampFormat::YearMonth => year_month(),
        TimestampFormat::MonthAbbrYear => month_abbr(),
    }
}

/// One scored decision. Feature values are aligned with the owning batch's
/// `feature_names`; `NaN` marks a missing value prior to imputation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    /// Opaque content-derived identifier; identical rows share it.
    pub id: String,
    pub timestamp: NaiveDateTime,
    pub features: Vec<Scalar>,
    /// Binary outcome when already known; absent during the blind period.
    pub label: Option<u8>,
}

impl DecisionRecord {
    pub fn new(timestamp: NaiveDateTime, features: Vec<Scalar>, label: Option<u8>) -> Self {
        let id = content_id(&timestamp, &features, label);
        Self {
            id,
            timestamp,
            features,
            label,
        }
    }

    /// Recompute the content id after a mutation (injection keeps ids stable
    /// instead, so perturbed records remain traceable to their source rows).
    pub fn refresh_id(&mut self) {
        self.id = content_id(&self.timestamp, &self.features, self.label);
    }
}

/// Content hash of a record; gives shuffled inputs a canonical identity.
fn content_id(timestamp: &NaiveDateTime, features: &[Scalar], label: Option<u8>) -> String {
    let mut hasher = Sha256::new();
    hasher.update(b"driftgov.record.v1");
    hasher.update(timestamp.and_utc().timestamp().to_le_bytes());
    for &v in features {
        let bits = if v.is_nan() { u64::MAX } else { v.to_bits() };
        hasher.update(bits.to_le_bytes());
    }
    hasher.update([label.map_or(2, |l| l)]);
    hex::encode(&hasher.finalize()[..8])
}

/// Loaded records plus the feature-name header they are aligned with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordBatch {
    pub feature_names: Vec<String>,
    pub records: Vec<DecisionRecord>,
}

/// Row accounting from one load.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_read: usize,
    /// Rows dropped for an unparseable timestamp.
    pub dropped_timestamp: usize,
    /// Rows dropped for an unparseable feature or label field.
    pub dropped_malformed: usize,
    /// Missing (not yet imputed) value count per feature.
    pub missing_values: BTreeMap<String, usize>,
}

impl IngestReport {
    pub fn rows_dropped(&self) -> usize {
        self.dropped_timestamp + self.dropped_malformed
    }
}

/// Ingestion and partitioning failures.
#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("invalid schema mapping: {reason}")]
    InvalidMapping { reason: String },
    #[error("mapped column `{column}` not found in source")]
    MissingColumn { column: String },
    #[error("source contains no data rows")]
    EmptySource,
    #[error("{dropped} of {total} rows malformed; schema mismatch suspected")]
    ThresholdedParseFailure { dropped: usize, total: usize },
    #[error("feature `{feature}` has no non-missing values in the reference window")]
    AllMissingFeature { feature: String },
    #[error("only {non_empty} non-empty windows; at least 2 required")]
    InsufficientWindows { non_empty: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

enum RowOutcome {
    Record(DecisionRecord),
    BadTimestamp,
    Malformed,
}

fn build_record(
    mapping: &SchemaMapping,
    raw_timestamp: &str,
    raw_features: &[Option<&str>],
    raw_label: Option<&str>,
    missing: &mut BTreeMap<String, usize>,
) -> RowOutcome {
    let Some(timestamp) = mapping.parse_timestamp(raw_timestamp) else {
        return RowOutcome::BadTimestamp;
    };
    let mut features = Vec::with_capacity(mapping.feature_columns.len());
    for (name, raw) in mapping.feature_columns.iter().zip(raw_features) {
        let trimmed = raw.map(str::trim).unwrap_or("");
        if trimmed.is_empty() {
            *missing.entry(name.clone()).or_insert(0) += 1;
            features.push(Scalar::NAN);
            continue;
        }
        match trimmed.parse::<Scalar>() {
            Ok(v) if v.is_finite() => features.push(v),
            Ok(_) => {
                // Parsed but non-finite (literal NaN/inf): treat as missing.
                *missing.entry(name.clone()).or_insert(0) += 1;
                features.push(Scalar::NAN);
            }
            Err(_) => return RowOutcome::Malformed,
        }
    }
    let label = match raw_label {
        None => None,
        Some(raw) => {
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                None
            } else if trimmed == mapping.label_positive_value {
                Some(1)
            } else {
                Some(0)
            }
        }
    };
    RowOutcome::Record(DecisionRecord::new(timestamp, features, label))
}

/// Load decision records from a delimited or line-JSON file.
///
/// Line-JSON is selected by a `.jsonl` / `.ndjson` extension; anything else
/// is read as delimited text with the mapping's delimiter. Rows with an
/// unparseable timestamp or feature are dropped and counted; missing feature
/// values are flagged in the report, not yet imputed.
pub fn load_records(
    source: &Path,
    mapping: &SchemaMapping,
) -> Result<(RecordBatch, IngestReport), IngestError> {
    mapping.validate()?;
    let ext = source
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    let (records, report) = if ext == "jsonl" || ext == "ndjson" {
        load_jsonl(source, mapping)?
    } else {
        load_delimited(source, mapping)?
    };
    if report.rows_read == 0 {
        return Err(IngestError::EmptySource);
    }
    if report.rows_dropped() * 2 > report.rows_read {
        return Err(IngestError::ThresholdedParseFailure {
            dropped: report.rows_dropped(),
            total: report.rows_read,
        });
    }
    Ok((
        RecordBatch {
            feature_names: mapping.feature_columns.clone(),
            records,
        },
        report,
    ))
}

fn load_delimited(
    source: &Path,
    mapping: &SchemaMapping,
) -> Result<(Vec<DecisionRecord>, IngestReport), IngestError> {
    let csv_to_io = |e: csv::Error| std::io::Error::new(std::io::ErrorKind::InvalidData, e);
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(mapping.delimiter as u8)
        .flexible(true)
        .from_path(source)
        .map_err(csv_to_io)?;
    let headers = reader.headers().map_err(csv_to_io)?.clone();
    let index_of = |column: &str| -> Result<usize, IngestError> {
        headers
            .iter()
            .position(|h| h == column)
            .ok_or_else(|| IngestError::MissingColumn {
                column: column.to_string(),
            })
    };
    let ts_idx = index_of(&mapping.timestamp_column)?;
    let label_idx = mapping.label_column.as_deref().map(index_of).transpose()?;
    let feature_idx: Vec<usize> = mapping
        .feature_columns
        .iter()
        .map(|c| index_of(c))
        .collect::<Result<_, _>>()?;

    let mut records = Vec::new();
    let mut report = IngestReport::default();
    for row in reader.records() {
        let Ok(row) = row else {
            report.rows_read += 1;
            report.dropped_malformed += 1;
            continue;
        };
        report.rows_read += 1;
        let raw_features: Vec<Option<&str>> = feature_idx.iter().map(|&i| row.get(i)).collect();
        let outcome = build_record(
            mapping,
            row.get(ts_idx).unwrap_or(""),
            &raw_features,
            label_idx.and_then(|i| row.get(i)),
            &mut report.missing_values,
        );
        match outcome {
            RowOutcome::Record(r) => records.push(r),
            RowOutcome::BadTimestamp => report.dropped_timestamp += 1,
            RowOutcome::Malformed => report.dropped_malformed += 1,
        }
    }
    Ok((records, report))
}

fn load_jsonl(
    source: &Path,
    mapping: &SchemaMapping,
) -> Result<(Vec<DecisionRecord>, IngestReport), IngestError> {
    let reader = BufReader::new(std::fs::File::open(source)?);
    let mut records = Vec::new();
    let mut report = IngestReport::default();
    let mut checked_columns = false;
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        report.rows_read += 1;
        let Ok(value) = serde_json::from_str::<serde_json::Value>(&line) else {
            report.dropped_malformed += 1;
            continue;
        };
        let Some(object) = value.as_object() else {
            report.dropped_malformed += 1;
            continue;
        };
        if !checked_columns {
            // The first well-formed object must carry every mapped key.
            for column in std::iter::once(&mapping.timestamp_column)
                .chain(mapping.label_column.iter())
                .chain(mapping.feature_columns.iter())
            {
                if !object.contains_key(column) {
                    return Err(IngestError::MissingColumn {
                        column: column.clone(),
                    });
                }
            }
            checked_columns = true;
        }
        let as_text = |v: &serde_json::Value| -> Option<String> {
            match v {
                serde_json::Value::String(s) => Some(s.clone()),
                serde_json::Value::Number(n) => Some(n.to_string()),
                serde_json::Value::Bool(b) => Some(if *b { "1" } else { "0" }.to_string()),
                serde_json::Value::Null => None,
                _ => None,
            }
        };
        let ts_raw = object
            .get(&mapping.timestamp_column)
            .and_then(&as_text)
            .unwrap_or_default();
        let feature_raw: Vec<Option<String>> = mapping
            .feature_columns
            .iter()
            .map(|c| object.get(c).and_then(&as_text))
            .collect();
        let feature_refs: Vec<Option<&str>> = feature_raw.iter().map(|o| o.as_deref()).collect();
        let label_raw = mapping
            .label_column
            .as_ref()
            .map(|c| object.get(c).and_then(as_text).unwrap_or_default());
        let outcome = build_record(
            mapping,
            &ts_raw,
            &feature_refs,
            label_raw.as_deref(),
            &mut report.missing_values,
        );
        match outcome {
            RowOutcome::Record(r) => records.push(r),
            RowOutcome::BadTimestamp => report.dropped_timestamp += 1,
            RowOutcome::Malformed => report.dropped_malformed += 1,
        }
    }
    Ok((records, report))
}

/// Per-feature means over non-missing values, used for imputation and
/// reference statistics.
pub fn feature_means(
    records: &[DecisionRecord],
    feature_names: &[String],
) -> Result<BTreeMap<String, Scalar>, IngestError> {
    let mut means = BTreeMap::new();
    for (idx, name) in feature_names.iter().enumerate() {
        let mut sum = 0.0;
        let mut count = 0usize;
        for record in records {
            let v = record.features[idx];
            if !v.is_nan() {
                sum += v;
                count += 1;
            }
        }
        if count == 0 {
            return Err(IngestError::AllMissingFeature {
                feature: name.clone(),
            });
        }
        means.insert(name.clone(), sum / count as Scalar);
    }
    Ok(means)
}

/// Replace missing values with the supplied per-feature means, in place.
/// Returns the imputation count per feature.
pub fn impute_missing(
    records: &mut [DecisionRecord],
    feature_names: &[String],
    means: &BTreeMap<String, Scalar>,
) -> Result<BTreeMap<String, usize>, IngestError> {
    let mut counts = BTreeMap::new();
    for (idx, name) in feature_names.iter().enumerate() {
        let mut imputed = 0usize;
        for record in records.iter_mut() {
            if record.features[idx].is_nan() {
                let Some(&mean) = means.get(name) else {
                    return Err(IngestError::AllMissingFeature {
                        feature: name.clone(),
                    });
                };
                record.features[idx] = mean;
                record.refresh_id();
                imputed += 1;
            }
        }
        if imputed > 0 {
            counts.insert(name.clone(), imputed);
        }
    }
    Ok(counts)
}

/// Write records as delimited text readable by [`load_records`] with the
/// same mapping (labels are emitted as `0`/`1`, so the mapping's positive
/// value must be `"1"` on re-ingestion; injection manifests embed such a
/// mapping).
pub fn write_records_csv(
    path: &Path,
    mapping: &SchemaMapping,
    feature_names: &[String],
    records: &[DecisionRecord],
) -> std::io::Result<()> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let delim = mapping.delimiter;
    write!(out, "{}", mapping.timestamp_column)?;
    for name in feature_names {
        write!(out, "{delim}{name}")?;
    }
    if let Some(label) = &mapping.label_column {
        write!(out, "{delim}{label}")?;
    }
    writeln!(out)?;
    for record in records {
        write!(out, "{}", record.timestamp.format("%Y-%m-%dT%H:%M:%S"))?;
        for &v in &record.features {
            write!(out, "{delim}{v}")?;
        }
        if mapping.label_column.is_some() {
            match record.label {
                Some(l) => write!(out, "{delim}{l}")?,
                None => write!(out, "{delim}")?,
            }
        }
        writeln!(out)?;
    }
    out.flush()
}

/// How records are grouped into non-overlapping, time-ordered windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WindowPolicy {
    /// One window per civil year of the timestamp.
    CalendarYear,
    /// Fixed-length windows of `span_days` days from the earliest timestamp.
    FixedDays { span_days: u32 },
}

/// One time window of the partitioned dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub index: usize,
    /// Human-readable window identity: the year, or the day range.
    pub label: String,
    pub start: NaiveDateTime,
    /// Exclusive end of the window's time range.
    pub end: NaiveDateTime,
    pub records: Vec<DecisionRecord>,
    /// Set on retained empty interior windows.
    pub empty_warning: bool,
}

/// Ordered, non-overlapping windows with window 0 as the reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowedDataset {
    pub feature_names: Vec<String>,
    pub policy: WindowPolicy,
    pub windows: Vec<Window>,
}

impl WindowedDataset {
    pub const REFERENCE_INDEX: usize = 0;

    pub fn reference(&self) -> &Window {
        &self.windows[Self::REFERENCE_INDEX]
    }

    /// Windows after the reference, in time order.
    pub fn monitoring_windows(&self) -> &[Window] {
        &self.windows[1..]
    }

    pub fn monitoring_count(&self) -> usize {
        self.windows.len().saturating_sub(1)
    }

    pub fn total_records(&self) -> usize {
        self.windows.iter().map(|w| w.records.len()).sum()
    }
}

/// Partition records into ordered time windows with window 0 as reference.
///
/// Empty interior windows are retained (flagged, metrics later reported as
/// absent) so downstream per-window schedules stay aligned with real time.
/// Records are sorted by `(timestamp, id)` within each window, which gives
/// injection a canonical traversal order.
pub fn partition_windows(
    batch: &RecordBatch,
    policy: WindowPolicy,
) -> Result<WindowedDataset, IngestError> {
    partition_windows_min(batch, policy, 2)
}

/// Same as [`partition_windows`] but with a caller-chosen minimum number of
/// non-empty windows (monitoring-only flows accept a single window).
pub fn partition_windows_min(
    batch: &RecordBatch,
    policy: WindowPolicy,
    min_non_empty: usize,
) -> Result<WindowedDataset, IngestError> {
    if batch.records.is_empty() {
        return Err(IngestError::EmptySource);
    }
    if let WindowPolicy::FixedDays { span_days: 0 } = policy {
        return Err(IngestError::InvalidMapping {
            reason: "fixed_days window span must be positive".into(),
        });
    }
    let mut windows = match policy {
        WindowPolicy::CalendarYear => partition_calendar(&batch.records),
        WindowPolicy::FixedDays { span_days } => partition_fixed(&batch.records, span_days),
    };
    for window in &mut windows {
        window
            .records
            .sort_by(|a, b| (a.timestamp, &a.id).cmp(&(b.timestamp, &b.id)));
        window.empty_warning = window.records.is_empty();
    }
    let non_empty = windows.iter().filter(|w| !w.records.is_empty()).count();
    if non_empty < min_non_empty {
        return Err(IngestError::InsufficientWindows { non_empty });
    }
    Ok(WindowedDataset {
        feature_names: batch.feature_names.clone(),
        policy,
        windows,
    })
}

fn partition_calendar(records: &[DecisionRecord]) -> Vec<Window> {
    let min_year = records.iter().map(|r| r.timestamp.year()).min().unwrap();
    let max_year = records.iter().map(|r| r.timestamp.year()).max().unwrap();
    let mut windows: Vec<Window> = (min_year..=max_year)
        .enumerate()
        .map(|(index, year)| Window {
            index,
            label: year.to_string(),
            start: year_start(year),
            end: year_start(year + 1),
            records: Vec::new(),
            empty_warning: false,
        })
        .collect();
    for record in records {
        let offset = (record.timestamp.year() - min_year) as usize;
        windows[offset].records.push(record.clone());
    }
    windows
}

fn year_start(year: i32) -> NaiveDateTime {
    NaiveDate::from_ymd_opt(year, 1, 1)
        .expect("valid year")
        .and_hms_opt(0, 0, 0)
        .expect("valid time")
}

fn partition_fixed(records: &[DecisionRecord], span_days: u32) -> Vec<Window> {
    let span_seconds = i64::from(span_days) * 86_400;
    let t_min = records.iter().map(|r| r.timestamp).min().unwrap();
    let index_of =
        |t: NaiveDateTime| -> usize { ((t - t_min).num_seconds() / span_seconds) as usize };
    let max_index = records.iter().map(|r| index_of(r.timestamp)).max().unwrap();
    let mut windows: Vec<Window> = (0..=max_index)
        .map(|index| {
            let start = t_min + chrono::Duration::seconds(index as i64 * span_seconds);
            Window {
                index,
                label: format!(
                    "days {}-{}",
                    index as u64 * u64::from(span_days),
                    (index as u64 + 1) * u64::from(span_days) - 1
                ),
                start,
                end: start + chrono::Duration::seconds(span_seconds),
                records: Vec::new(),
                empty_warning: false,
            }
        })
        .collect();
    for record in records {
        windows[index_of(record.timestamp)]
            .records
            .push(record.clone());
    }
    windows
}
