//! Backtest configuration, read from TOML.
//!
//! Top-level keys are the cycle fields (`window`, `fit_lag`, `horizon`,
//! `shift`, `risk_kind`, `bin_spec`, `master_seed`) plus the optional
//! analysis tables `profile`, `ks`, `percentile_track` and `cumulative`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entropy::RiskKind;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinSpecConfig {
    pub target_per_bin: usize,
    #[serde(default = "default_extra_high_bins")]
    pub extra_high_bins: usize,
}

fn default_extra_high_bins() -> usize {
    2
}

impl Default for BinSpecConfig {
    fn default() -> Self {
        Self {
            target_per_bin: 10,
            extra_high_bins: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CycleConfig {
    /// Daily return steps in the estimation window; the window holds
    /// `window + 1` prices ending at the cycle start.
    pub window: usize,
    pub fit_lag: usize,
    pub horizon: usize,
    pub shift: usize,
    pub risk_kind: RiskKind,
    pub bin_spec: BinSpecConfig,
    pub master_seed: u64,
}

impl Default for CycleConfig {
    fn default() -> Self {
        Self {
            window: 1400,
            fit_lag: 10,
            horizon: 126,
            shift: 126,
            risk_kind: RiskKind::Atre,
            bin_spec: BinSpecConfig::default(),
            master_seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileConfig {
    /// Bins whose center exceeds this value are dropped from the profile.
    pub risk_cutoff: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KsConfig {
    /// Parametric-bootstrap replicates for the market fit; 0 disables.
    pub replicates: usize,
}

impl Default for KsConfig {
    fn default() -> Self {
        Self { replicates: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PercentileTrackConfig {
    pub percentile: f64,
    /// Trading days between samples.
    pub step: usize,
    pub kinds: Vec<RiskKind>,
}

impl Default for PercentileTrackConfig {
    fn default() -> Self {
        Self {
            percentile: 90.0,
            step: 21,
            kinds: vec![RiskKind::Atre, RiskKind::SMinus, RiskKind::SPlus, RiskKind::TreSym],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Target {
    Percentile(f64),
    FixedRisk(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySpec {
    pub kind: RiskKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub percentile: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_risk: Option<f64>,
}

impl StrategySpec {
    pub fn target(&self) -> Target {
        match (self.percentile, self.fixed_risk) {
            (Some(p), None) => Target::Percentile(p),
            (None, Some(v)) => Target::FixedRisk(v),
            _ => unreachable!("validated strategy"),
        }
    }

    /// Row label for the earnings statistics table.
    pub fn label(&self) -> String {
        match self.target() {
            Target::Percentile(p) => format!("{} {p}th percentile", self.kind.label()),
            Target::FixedRisk(v) => format!("{} risk {v}", self.kind.label()),
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        match (self.percentile, self.fixed_risk) {
            (Some(p), None) if p > 0.0 && p <= 100.0 => Ok(()),
            (None, Some(v)) if v.is_finite() => Ok(()),
            _ => Err(ConfigError::Invalid(format!(
                "strategy for {} needs exactly one of percentile in (0, 100] or finite fixed_risk",
                self.kind
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CumulativeConfig {
    /// Holding span in trading days; a whole number of horizons.
    pub span: usize,
    /// Trading days between portfolio start dates.
    pub step: usize,
    pub k_stocks: usize,
    pub strategies: Vec<StrategySpec>,
}

impl Default for CumulativeConfig {
    fn default() -> Self {
        Self {
            span: 2520,
            step: 21,
            k_stocks: 15,
            strategies: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BacktestConfig {
    #[serde(flatten)]
    pub cycle: CycleConfig,
    #[serde(default)]
    pub profile: ProfileConfig,
    #[serde(default)]
    pub ks: KsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub percentile_track: Option<PercentileTrackConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cumulative: Option<CumulativeConfig>,
}

const KNOWN_KEYS: [&str; 11] = [
    "window",
    "fit_lag",
    "horizon",
    "shift",
    "risk_kind",
    "bin_spec",
    "master_seed",
    "profile",
    "ks",
    "percentile_track",
    "cumulative",
];

impl BacktestConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        if let Some(key) = table.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(ConfigError::UnknownKey(key.clone()));
        }
        let config: BacktestConfig = table.try_into().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |msg: String| Err(ConfigError::Invalid(msg));
        let c = &self.cycle;
        if c.fit_lag == 0 || c.window <= c.fit_lag {
            return invalid(format!("need window > fit_lag > 0, got {} and {}", c.window, c.fit_lag));
        }
        if c.horizon == 0 || c.horizon != c.shift {
            return invalid(format!("need horizon = shift > 0, got {} and {}", c.horizon, c.shift));
        }
        if c.bin_spec.target_per_bin == 0 {
            return invalid("bin_spec.target_per_bin must be positive".into());
        }
        if let Some(cut) = self.profile.risk_cutoff {
            if !cut.is_finite() {
                return invalid("profile.risk_cutoff must be finite".into());
            }
        }
        if self.ks.replicates != 0 && self.ks.replicates < crate::estimation::MIN_REPLICATES {
            return invalid(format!(
                "ks.replicates must be 0 or at least {}",
                crate::estimation::MIN_REPLICATES
            ));
        }
        if let Some(track) = &self.percentile_track {
            if !(track.percentile > 0.0 && track.percentile <= 100.0) || track.step == 0 || track.kinds.is_empty() {
                return invalid("percentile_track needs percentile in (0, 100], step > 0 and some kinds".into());
            }
        }
        if let Some(cum) = &self.cumulative {
            if cum.span == 0 || cum.span % c.horizon != 0 || cum.step == 0 || cum.k_stocks == 0 {
                return invalid(format!(
                    "cumulative needs span a positive multiple of horizon {}, step > 0 and k_stocks > 0",
                    c.horizon
                ));
            }
            if cum.strategies.is_empty() {
                return invalid("cumulative.strategies is empty".into());
            }
            for s in &cum.strategies {
                s.validate()?;
            }
        }
        Ok(())
    }
}
