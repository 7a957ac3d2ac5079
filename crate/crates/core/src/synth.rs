//! Synthetic credit-shaped datasets with a known logistic ground truth.
//!
//! The generator exists so every structural property of the toolkit can be
//! exercised offline: records carry the credit-style feature names the
//! injection defaults target, labels follow a fixed logistic model of the
//! latent draws, and feature distributions are stationary across years, so
//! an uninjected run shows near-zero drift.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::ingest::{DecisionRecord, RecordBatch, SchemaMapping, TimestampFormat};
use crate::logreg::sigmoid;
use crate::rng::{self, NormalSource};
use crate::Scalar;

/// Generated feature columns, in order.
pub const FEATURE_NAMES: [&str; 5] = ["annual_inc", "dti", "revol_util", "int_rate", "fico"];

/// Ground-truth coefficients on the latent standard-normal draws behind
/// each feature. Kept moderate so the fitted reference scorer stays
/// entropy-rich rather than near-separable.
const TRUE_WEIGHTS: [Scalar; 5] = [-0.30, 0.40, 0.35, 0.20, -0.35];
const TRUE_INTERCEPT: Scalar = -1.2;

/// Generator parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub records: usize,
    /// Number of consecutive calendar years the records span.
    pub years: usize,
    pub seed: u64,
    pub start_year: i32,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            records: 10_000,
            years: 5,
            seed: 0,
            start_year: 2008,
        }
    }
}

/// Schema mapping matching the generator's CSV output.
pub fn canonical_mapping() -> SchemaMapping {
    SchemaMapping {
        timestamp_column: "date".into(),
        label_column: Some("default".into()),
        feature_columns: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        label_positive_value: "1".into(),
        timestamp_format: TimestampFormat::Auto,
        delimiter: ',',
    }
}

/// Generate a labeled record batch. Deterministic in the config.
pub fn generate(config: &SynthConfig) -> RecordBatch {
    assert!(config.records > 0 && config.years > 0);
    let mut normals = NormalSource::new(rng::derive_stream(config.seed, 0, "synth", "features"));
    let mut labels = rng::derive_stream(config.seed, 0, "synth", "labels");
    let mut clock = rng::derive_stream(config.seed, 0, "synth", "timestamps");

    let mut records = Vec::with_capacity(config.records);
    for i in 0..config.records {
        let latent: Vec<Scalar> = (0..FEATURE_NAMES.len())
            .map(|_| normals.next_normal())
            .collect();
        let features = vec![
            (11.0 + 0.5 * latent[0]).exp(), // annual_inc, lognormal
            18.0 + 8.0 * latent[1],         // dti
            50.0 + 25.0 * latent[2],        // revol_util
            13.0 + 4.5 * latent[3],         // int_rate
            695.0 + 35.0 * latent[4],       // fico
        ];
        let z = TRUE_INTERCEPT
            + TRUE_WEIGHTS
                .iter()
                .zip(&latent)
                .map(|(w, n)| w * n)
                .sum::<Scalar>();
        let label = u8::from(rng::uniform(&mut labels) < sigmoid(z));

        let year = config.start_year + (i % config.years) as i32;
        let ordinal = 1 + rng::index_below(&mut clock, 365) as u32;
        let seconds = rng::index_below(&mut clock, 86_400) as u32;
        let date = NaiveDate::from_yo_opt(year, ordinal)
            .expect("ordinal within year")
            .and_hms_opt(seconds / 3600, (seconds / 60) % 60, seconds % 60)
            .expect("seconds within day");
        records.push(DecisionRecord::new(date, features, Some(label)));
    }
    RecordBatch {
        feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        records,
    }
}
