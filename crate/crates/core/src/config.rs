//! Versioned JSON configuration documents and the frozen profile document.
//!
//! Every on-disk document carries a `schema_version` field so that future
//! incompatible changes fail loudly instead of misparsing.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::ingest::{SchemaMapping, WindowPolicy};
use crate::monitor::MonitorConfig;
use crate::proxies::ReferenceProfile;
use crate::Scalar;

/// Current schema version for all config and profile documents.
pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Configuration loading failures.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("failed to parse JSON document: {0}")]
    Json(#[from] serde_json::Error),
    #[error(
        "unsupported schema_version {found}; this build reads version {CONFIG_SCHEMA_VERSION}"
    )]
    UnsupportedVersion { found: u32 },
    #[error("invalid configuration: {reason}")]
    Invalid { reason: String },
}

fn check_version(found: u32) -> Result<(), ConfigError> {
    if found == CONFIG_SCHEMA_VERSION {
        Ok(())
    } else {
        Err(ConfigError::UnsupportedVersion { found })
    }
}

/// Read and parse a JSON document.
pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, ConfigError> {
    let bytes = std::fs::read(path)?;
    Ok(serde_json::from_slice(&bytes)?)
}

/// Write a pretty-printed JSON document.
pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ConfigError> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    std::fs::write(path, bytes)?;
    Ok(())
}

/// Schema mapping config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaConfig {
    pub schema_version: u32,
    #[serde(flatten)]
    pub mapping: SchemaMapping,
}

impl SchemaConfig {
    pub fn new(mapping: SchemaMapping) -> Self {
        Self {
            schema_version: CONFIG_SCHEMA_VERSION,
            mapping,
        }
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let doc: Self = load_json(path)?;
        check_version(doc.schema_version)?;
        doc.mapping.validate().map_err(|e| ConfigError::Invalid {
            reason: e.to_string(),
        })?;
        Ok(doc)
    }
}

/// Monitor config file; may pin the window policy the deployment uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorConfigFile {
    pub schema_version: u32,
    #[serde(default)]
    pub window_policy: Option<WindowPolicy>,
    #[serde(flatten)]
    pub monitor: MonitorConfig,
}

impl MonitorConfigFile {
    /// Credit-scoring preset: defaults plus yearly windows.
    pub fn credit() -> Self {
        Self {
            schema_version: CONFIG_SCHEMA_VERSION,
            window_policy: Some(WindowPolicy::CalendarYear),
            monitor: MonitorConfig::default(),
        }
    }

    /// Fraud preset: same monitors over 30-day windows.
    pub fn fraud() -> Self {
        Self {
            schema_version: CONFIG_SCHEMA_VERSION,
            window_policy: Some(WindowPolicy::FixedDays { span_days: 30 }),
            monitor: MonitorConfig::default(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let doc: Self = load_json(path)?;
        check_version(doc.schema_version)?;
        doc.monitor.validate().map_err(|e| ConfigError::Invalid {
            reason: e.to_string(),
        })?;
        Ok(doc)
    }
}

/// Frozen profile document produced by the `profile` stage. Bundles the
/// schema mapping, window policy and imputation means so the `monitor`
/// stage runs self-contained on new data files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileDocument {
    pub schema_version: u32,
    pub mapping: SchemaMapping,
    pub window_policy: WindowPolicy,
    /// Reference-window feature means for imputing later windows.
    pub imputation_means: BTreeMap<String, Scalar>,
    pub profile: ReferenceProfile,
}

impl ProfileDocument {
    pub fn new(
        mapping: SchemaMapping,
        window_policy: WindowPolicy,
        imputation_means: BTreeMap<String, Scalar>,
        profile: ReferenceProfile,
    ) -> Self {
        Self {
            schema_version: CONFIG_SCHEMA_VERSION,
            mapping,
            window_policy,
            imputation_means,
            profile,
        }
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let doc: Self = load_json(path)?;
        check_version(doc.schema_version)?;
        Ok(doc)
    }

    pub fn save(&self, path: &Path) -> Result<(), ConfigError> {
        save_json(path, self)
    }
}

/// Parse a CLI window-policy argument: `calendar_year` or `fixed:N`.
pub fn parse_window_policy(text: &str) -> Result<WindowPolicy, ConfigError> {
    if text == "calendar_year" {
        return Ok(WindowPolicy::CalendarYear);
    }
    if let Some(days) = text.strip_prefix("fixed:") {
        let span_days: u32 = days.parse().map_err(|_| ConfigError::Invalid {
            reason: format!("invalid day span in `{text}`"),
        })?;
        if span_days == 0 {
            return Err(ConfigError::Invalid {
                reason: "day span must be positive".into(),
            });
        }
        return Ok(WindowPolicy::FixedDays { span_days });
    }
    Err(ConfigError::Invalid {
        reason: format!("unknown window policy `{text}`; use calendar_year or fixed:N"),
    })
}
