//! Label-free drift monitoring with governance-calibrated alerts.
//!
//! The toolkit watches a scored decision stream for distributional drift
//! without waiting for ground-truth labels, which in risk systems arrive
//! months after the decision. Four proxy monitors (score-distribution PSI,
//! feature PSI, normalized prediction entropy, confidence KS) are computed
//! per time window against a frozen reference profile, thresholded, combined
//! into a weighted composite score, graded into a severity level, and folded
//! into a multiplicative cumulative drift score. Every alert carries a
//! recommended response protocol so the output is an operational escalation,
//! not a bare statistical alarm.
//!
//! A drift-injection harness applies controlled covariate / mixed / pure
//! concept perturbations to a windowed dataset and machine-verifies the
//! structural detectability boundary: feature-space drift is visible,
//! label-only drift is provably invisible to every label-free monitor.
//!
//! Numeric kernels ([`metrics`], [`logreg`], [`betting`]) are generic over
//! the scalar type via [`scalar::Real`]; the pipeline instantiates them at
//! [`Scalar`] (`f64`).

pub mod betting;
pub mod config;
pub mod harness;
pub mod ingest;
pub mod inject;
pub mod logreg;
pub mod metrics;
pub mod monitor;
pub mod proxies;
pub mod refmodel;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod synth;

/// Scalar type used by the concrete monitoring pipeline.
pub type Scalar = f64;

/// Bin profile over [`Scalar`] as produced by the pipeline.
pub type BinProfile = metrics::BinProfile<Scalar>;

pub use ingest::{
    DecisionRecord, IngestReport, RecordBatch, SchemaMapping, WindowPolicy, WindowedDataset,
};
pub use monitor::{GovernanceAlert, MonitorConfig, Severity, TriggerSet};
pub use proxies::{RawProxyValues, ReferenceProfile};
pub use refmodel::ReferenceScorer;
