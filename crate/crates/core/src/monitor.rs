//! Governance outputs: triggers, composite score, severity, cumulative
//! drift score and the recommended response protocol.
//!
//! Raw proxy values become binary trigger states against calibrated
//! thresholds; the composite is the weight-normalized sum of those states,
//! so it takes discrete levels — the same composite appears whenever the
//! same categories trigger, regardless of raw magnitude. The cumulative
//! drift score bets on each window's composite exceeding a threshold and
//! accumulates multiplicatively; crossing the configured wealth threshold
//! (1/α) signals sustained drift.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::betting;
use crate::proxies::RawProxyValues;
use crate::Scalar;

/// The four label-free proxy monitors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProxyKind {
    ScorePsi,
    FeaturePsi,
    Entropy,
    ConfidenceKs,
}

impl ProxyKind {
    pub const ALL: [ProxyKind; 4] = [
        ProxyKind::ScorePsi,
        ProxyKind::FeaturePsi,
        ProxyKind::Entropy,
        ProxyKind::ConfidenceKs,
    ];
}

/// Per-monitor trigger thresholds (credit-scoring defaults).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub score_psi: Scalar,
    pub feature_psi: Scalar,
    pub entropy: Scalar,
    pub confidence_ks: Scalar,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            score_psi: 0.25,
            feature_psi: 0.25,
            entropy: 0.5,
            confidence_ks: 0.15,
        }
    }
}

impl Thresholds {
    pub fn get(&self, kind: ProxyKind) -> Scalar {
        match kind {
            ProxyKind::ScorePsi => self.score_psi,
            ProxyKind::FeaturePsi => self.feature_psi,
            ProxyKind::Entropy => self.entropy,
            ProxyKind::ConfidenceKs => self.confidence_ks,
        }
    }
}

/// Per-monitor composite weights, normalized over the active set at use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Weights {
    pub score_psi: Scalar,
    pub feature_psi: Scalar,
    pub entropy: Scalar,
    pub confidence_ks: Scalar,
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            score_psi: 1.0 / 6.0,
            feature_psi: 1.0 / 3.0,
            entropy: 0.25,
            confidence_ks: 0.25,
        }
    }
}

impl Weights {
    pub fn get(&self, kind: ProxyKind) -> Scalar {
        match kind {
            ProxyKind::ScorePsi => self.score_psi,
            ProxyKind::FeaturePsi => self.feature_psi,
            ProxyKind::Entropy => self.entropy,
            ProxyKind::ConfidenceKs => self.confidence_ks,
        }
    }
}

/// Ordered composite cutoffs partitioning (0, 1] into severity grades.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeverityBands {
    pub low_max: Scalar,
    pub medium_max: Scalar,
    pub high_max: Scalar,
}

impl Default for SeverityBands {
    fn default() -> Self {
        Self {
            low_max: 0.60,
            medium_max: 0.70,
            high_max: 0.80,
        }
    }
}

/// Monitoring configuration; defaults mirror the credit-scoring preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MonitorConfig {
    pub thresholds: Thresholds,
    pub weights: Weights,
    pub severity_bands: SeverityBands,
    /// Composite level θ the cumulative score bets against.
    pub cumulative_theta: Scalar,
    /// Betting fraction λ scaling each window's stake.
    pub betting_fraction: Scalar,
    /// Wealth level treated as substantial accumulated evidence (1/α).
    pub alert_wealth_threshold: Scalar,
    /// Lower bound on the per-window factor, keeping wealth positive.
    pub wealth_floor: Scalar,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        Self {
            thresholds: Thresholds::default(),
            weights: Weights::default(),
            severity_bands: SeverityBands::default(),
            cumulative_theta: 0.5,
            betting_fraction: 1.0,
            alert_wealth_threshold: 20.0,
            wealth_floor: 0.01,
        }
    }
}

/// Monitor configuration and composition failures.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MonitorError {
    #[error("no active monitors to normalize the composite over")]
    NoActiveMonitors,
    #[error("invalid monitor config: {reason}")]
    InvalidConfig { reason: String },
}

impl MonitorConfig {
    pub fn validate(&self) -> Result<(), MonitorError> {
        let fail = |reason: &str| {
            Err(MonitorError::InvalidConfig {
                reason: reason.to_string(),
            })
        };
        for kind in ProxyKind::ALL {
            if self.thresholds.get(kind) <= 0.0 {
                return fail("thresholds must be positive");
            }
            if self.weights.get(kind) <= 0.0 {
                return fail("weights must be positive");
            }
        }
        if !(self.cumulative_theta > 0.0 && self.cumulative_theta < 1.0) {
            return fail("cumulative_theta must lie in (0, 1)");
        }
        if !(self.betting_fraction > 0.0 && self.betting_fraction <= 1.0) {
            return fail("betting_fraction must lie in (0, 1]");
        }
        if self.alert_wealth_threshold <= 1.0 {
            return fail("alert_wealth_threshold must exceed 1");
        }
        if !(self.wealth_floor > 0.0 && self.wealth_floor < 1.0) {
            return fail("wealth_floor must lie in (0, 1)");
        }
        let b = self.severity_bands;
        if !(b.low_max > 0.0
            && b.low_max <= b.medium_max
            && b.medium_max <= b.high_max
            && b.high_max <= 1.0)
        {
            return fail("severity bands must be ordered within (0, 1]");
        }
        Ok(())
    }
}

/// The subset of monitors whose raw value exceeded its threshold.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TriggerSet(pub BTreeSet<ProxyKind>);

impl TriggerSet {
    pub fn contains(&self, kind: ProxyKind) -> bool {
        self.0.contains(&kind)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<ProxyKind> for TriggerSet {
    fn from_iter<T: IntoIterator<Item = ProxyKind>>(iter: T) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Alert severity grades, totally ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    None,
    Low,
    Medium,
    High,
    Critical,
}

impl std::fmt::Display for Severity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Severity::None => "none",
            Severity::Low => "low",
            Severity::Medium => "medium",
            Severity::High => "high",
            Severity::Critical => "critical",
        };
        f.write_str(s)
    }
}

/// Escalation protocols, graded by severity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseProtocol {
    NoAction,
    IncreasedMonitoring,
    IncreasedManualReview,
    ConservativePolicySwitch,
    ModelReviewFallback,
}

impl ResponseProtocol {
    /// Human-readable operator action for the protocol.
    pub fn action(&self) -> &'static str {
        match self {
            ResponseProtocol::NoAction => "no action",
            ResponseProtocol::IncreasedMonitoring => "increase monitoring frequency",
            ResponseProtocol::IncreasedManualReview => "increase manual review rate",
            ResponseProtocol::ConservativePolicySwitch => {
                "switch to conservative decision policy and convene model committee review"
            }
            ResponseProtocol::ModelReviewFallback => {
                "model review / fallback to previous model (rollback)"
            }
        }
    }
}

/// Protocol identifier plus the human-readable action, as shipped in alerts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecommendedResponse {
    pub protocol: ResponseProtocol,
    pub action: String,
}

/// Sequential cumulative drift score state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulativeState {
    /// Current wealth; starts at 1 and stays strictly positive.
    pub wealth: Scalar,
    pub history: Vec<CumulativeStep>,
    /// Holds exactly when current wealth is at or above the alert threshold.
    pub alert_active: bool,
}

/// One window's contribution to the cumulative score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulativeStep {
    pub composite: Scalar,
    pub factor: Scalar,
    pub wealth: Scalar,
}

impl Default for CumulativeState {
    fn default() -> Self {
        Self {
            wealth: 1.0,
            history: Vec::new(),
            alert_active: false,
        }
    }
}

/// One window's governance alert: what triggered, how bad, what to do.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GovernanceAlert {
    pub window_index: usize,
    pub triggered: TriggerSet,
    pub raw: RawProxyValues,
    pub composite: Scalar,
    pub severity: Severity,
    pub cumulative_wealth: Scalar,
    pub cumulative_alert_active: bool,
    pub recommended_response: RecommendedResponse,
}

/// Evaluate per-monitor triggers: a monitor fires iff its raw value is
/// strictly greater than its threshold. Feature PSI uses the aggregate.
pub fn evaluate_triggers(raw: &RawProxyValues, config: &MonitorConfig) -> TriggerSet {
    let value = |kind: ProxyKind| -> Scalar {
        match kind {
            ProxyKind::ScorePsi => raw.score_psi,
            ProxyKind::FeaturePsi => raw.feature_psi_aggregate,
            ProxyKind::Entropy => raw.entropy,
            ProxyKind::ConfidenceKs => raw.confidence_ks,
        }
    };
    ProxyKind::ALL
        .into_iter()
        .filter(|&kind| value(kind) > config.thresholds.get(kind))
        .collect()
}

/// Weighted sum of binary trigger states normalized by the total weight of
/// the active monitors. With the default weights and all four monitors
/// active the denominator is exactly 1.
pub fn composite_score(
    triggers: &TriggerSet,
    active: &[ProxyKind],
    config: &MonitorConfig,
) -> Result<Scalar, MonitorError> {
    if active.is_empty() {
        return Err(MonitorError::NoActiveMonitors);
    }
    debug_assert!(
        triggers.0.iter().all(|k| active.contains(k)),
        "triggers must be a subset of active monitors"
    );
    let total: Scalar = active.iter().map(|&k| config.weights.get(k)).sum();
    let fired: Scalar = active
        .iter()
        .filter(|&&k| triggers.contains(k))
        .map(|&k| config.weights.get(k))
        .sum();
    Ok(fired / total)
}

/// Map a composite score to a severity grade via the configured bands.
///
/// A window with nothing triggered is `None` severity; the bands partition
/// the remaining (0, 1] range.
pub fn assign_severity(
    composite: Scalar,
    triggers: &TriggerSet,
    config: &MonitorConfig,
) -> Severity {
    if triggers.is_empty() || composite <= 0.0 {
        return Severity::None;
    }
    let bands = config.severity_bands;
    if composite <= bands.low_max {
        Severity::Low
    } else if composite <= bands.medium_max {
        Severity::Medium
    } else if composite <= bands.high_max {
        Severity::High
    } else {
        Severity::Critical
    }
}

/// Advance the cumulative drift score by one window (strictly in window
/// order): wealth multiplies by `max(floor, 1 + λ·(composite − θ))`.
pub fn update_cumulative(
    state: &CumulativeState,
    composite: Scalar,
    config: &MonitorConfig,
) -> CumulativeState {
    let factor = betting::betting_factor(
        composite,
        config.cumulative_theta,
        config.betting_fraction,
        config.wealth_floor,
    );
    let wealth = state.wealth * factor;
    let mut history = state.history.clone();
    history.push(CumulativeStep {
        composite,
        factor,
        wealth,
    });
    CumulativeState {
        wealth,
        history,
        alert_active: wealth >= config.alert_wealth_threshold,
    }
}

/// Fixed severity-to-protocol escalation mapping.
pub fn recommend_response(severity: Severity) -> RecommendedResponse {
    let protocol = match severity {
        Severity::None => ResponseProtocol::NoAction,
        Severity::Low => ResponseProtocol::IncreasedMonitoring,
        Severity::Medium => ResponseProtocol::IncreasedManualReview,
        Severity::High => ResponseProtocol::ConservativePolicySwitch,
        Severity::Critical => ResponseProtocol::ModelReviewFallback,
    };
    RecommendedResponse {
        protocol,
        action: protocol.action().to_string(),
    }
}

/// Compose triggers → composite → severity → cumulative update → response
/// into one governance alert for the window.
pub fn generate_alert(
    window_index: usize,
    raw: &RawProxyValues,
    config: &MonitorConfig,
    state: &CumulativeState,
) -> Result<(GovernanceAlert, CumulativeState), MonitorError> {
    let triggered = evaluate_triggers(raw, config);
    let composite = composite_score(&triggered, &ProxyKind::ALL, config)?;
    let severity = assign_severity(composite, &triggered, config);
    let next_state = update_cumulative(state, composite, config);
    let recommended_response = recommend_response(severity);
    let alert = GovernanceAlert {
        window_index,
        triggered,
        raw: raw.clone(),
        composite,
        severity,
        cumulative_wealth: next_state.wealth,
        cumulative_alert_active: next_state.alert_active,
        recommended_response,
    };
    Ok((alert, next_state))
}
