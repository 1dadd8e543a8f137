//! Synthetic price universes with known branch parameters.
//!
//! Daily log returns are `drift + market_beta · r_m + vol · (x - E[x])`
//! with `x` drawn from the ticker's asymmetric q-Gaussian. Centering makes
//! `drift` the expected log return, so branches need `q < 2`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backtest::calendar::trading_days;
use crate::backtest::prices::PriceSeries;
use crate::backtest::universe::{Universe, UniverseError};
use crate::distributions::{AsymmetricDist, QGaussianParams};
use crate::seed::{derive_seed, rng_from_seed};

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error("simulation spec parse error: {0}")]
    Parse(String),
    #[error("invalid simulation spec: {0}")]
    Invalid(String),
    #[error("{0}")]
    Io(String),
}

fn default_vol() -> f64 {
    0.01
}

fn default_initial_price() -> f64 {
    100.0
}

/// Parameters in force from `from_day` (a price index) onwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Regime {
    pub from_day: usize,
    pub neg: QGaussianParams,
    pub pos: QGaussianParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neg: Option<QGaussianParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos: Option<QGaussianParams>,
    #[serde(default)]
    pub drift: f64,
    #[serde(default = "default_vol")]
    pub vol: f64,
    #[serde(default = "default_initial_price")]
    pub initial_price: f64,
    #[serde(default)]
    pub market_beta: f64,
    /// Copy another series' prices, rescaled to `initial_price`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clone_of: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub regimes: Vec<Regime>,
}

impl SeriesSpec {
    /// A generated series with the given shape and defaults elsewhere.
    pub fn new(name: impl Into<String>, neg: QGaussianParams, pos: QGaussianParams) -> Self {
        Self {
            name: name.into(),
            neg: Some(neg),
            pos: Some(pos),
            drift: 0.0,
            vol: default_vol(),
            initial_price: default_initial_price(),
            market_beta: 0.0,
            clone_of: None,
            regimes: Vec::new(),
        }
    }

    pub fn clone_of(name: impl Into<String>, source: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            neg: None,
            pos: None,
            drift: 0.0,
            vol: default_vol(),
            initial_price: default_initial_price(),
            market_beta: 0.0,
            clone_of: Some(source.into()),
            regimes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    #[serde(default)]
    pub seed: u64,
    pub start_date: NaiveDate,
    /// Prices per series, one per trading day.
    pub days: usize,
    pub market: SeriesSpec,
    #[serde(default)]
    pub tickers: Vec<SeriesSpec>,
}

/// Generated prices: the market first, then tickers in spec order.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedUniverse {
    pub market: PriceSeries,
    pub tickers: Vec<PriceSeries>,
}

impl SimulatedUniverse {
    pub fn to_universe(&self) -> Result<Universe, UniverseError> {
        Universe::new(self.market.clone(), &self.tickers)
    }
}

fn invalid<T>(msg: String) -> Result<T, SimulationError> {
    Err(SimulationError::Invalid(msg))
}

fn check_shape(name: &str, neg: &QGaussianParams, pos: &QGaussianParams) -> Result<(), SimulationError> {
    if neg.q() >= 2.0 || pos.q() >= 2.0 {
        return invalid(format!("{name}: centering needs q < 2 on both branches"));
    }
    Ok(())
}

impl SimulationSpec {
    pub fn from_toml(text: &str) -> Result<Self, SimulationError> {
        let spec: Self = toml::from_str(text).map_err(|e| SimulationError::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        if self.days < 2 {
            return invalid(format!("days must be at least 2, got {}", self.days));
        }
        if self.market.clone_of.is_some() || self.market.market_beta != 0.0 {
            return invalid("the market cannot be a clone or carry a market_beta".into());
        }
        let mut seen: Vec<&str> = Vec::new();
        for s in std::iter::once(&self.market).chain(&self.tickers) {
            if s.name.is_empty() || s.name.contains(['/', '\\', ',']) {
                return invalid(format!("bad series name {:?}", s.name));
            }
            if seen.contains(&s.name.as_str()) {
                return invalid(format!("duplicate series name {}", s.name));
            }
            if !(s.initial_price > 0.0 && s.initial_price.is_finite()) {
                return invalid(format!("{}: initial_price must be positive", s.name));
            }
            if let Some(source) = &s.clone_of {
                if !seen.contains(&source.as_str()) {
                    return invalid(format!("{}: clone_of must name the market or an earlier ticker", s.name));
                }
            } else {
                let (Some(neg), Some(pos)) = (&s.neg, &s.pos) else {
                    return invalid(format!("{}: needs neg and pos unless clone_of is set", s.name));
                };
                check_shape(&s.name, neg, pos)?;
                if !(s.vol > 0.0 && s.vol.is_finite()) || !s.drift.is_finite() || !s.market_beta.is_finite() {
                    return invalid(format!("{}: vol must be positive; drift and market_beta finite", s.name));
                }
                let mut last = 0;
                for r in &s.regimes {
                    if r.from_day <= last || r.from_day >= self.days {
                        return invalid(format!("{}: regimes need increasing from_day in 1..days", s.name));
                    }
                    last = r.from_day;
                    check_shape(&s.name, &r.neg, &r.pos)?;
                }
            }
            seen.push(&s.name);
        }
        Ok(())
    }

    /// Generate every series. Each series draws from its own stream, so
    /// adding a ticker never changes the others.
    pub fn generate(&self) -> Result<SimulatedUniverse, SimulationError> {
        self.validate()?;
        let dates = trading_days(self.start_date, self.days);
        let mut built: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
        let market_returns = self.log_returns(&self.market, None);
        let market_prices = compound(self.market.initial_price, &market_returns);
        built.insert(&self.market.name, market_prices.clone());
        let mut tickers = Vec::with_capacity(self.tickers.len());
        for s in &self.tickers {
            let prices = match &s.clone_of {
                Some(source) => {
                    let src = &built[source.as_str()];
                    let factor = s.initial_price / src[0];
                    src.iter().map(|p| p * factor).collect()
                }
                None => compound(s.initial_price, &self.log_returns(s, Some(&market_returns))),
            };
            built.insert(&s.name, prices.clone());
            tickers.push(PriceSeries::new(s.name.clone(), dates.clone(), prices).map_err(|e| SimulationError::Invalid(e.to_string()))?);
        }
        let market = PriceSeries::new(self.market.name.clone(), dates, market_prices)
            .map_err(|e| SimulationError::Invalid(e.to_string()))?;
        Ok(SimulatedUniverse { market, tickers })
    }

    /// `days - 1` daily log returns; entry `t - 1` moves price `t - 1` to `t`.
    fn log_returns(&self, s: &SeriesSpec, market: Option<&[f64]>) -> Vec<f64> {
        let mut rng = rng_from_seed(derive_seed(self.seed, &format!("simulate/{}", s.name), 0));
        let base = Regime {
            from_day: 0,
            neg: s.neg.expect("validated"),
            pos: s.pos.expect("validated"),
            drift: Some(s.drift),
        };
        let regimes: Vec<&Regime> = std::iter::once(&base).chain(&s.regimes).collect();
        let mut out = Vec::with_capacity(self.days - 1);
        for (k, regime) in regimes.iter().enumerate() {
            let from = regime.from_day.max(1);
            let to = regimes.get(k + 1).map_or(self.days, |r| r.from_day);
            let dist = AsymmetricDist::new(regime.neg, regime.pos, 0.0).expect("zero offset");
            let center = dist.mean().expect("validated q < 2");
            let drift = regime.drift.unwrap_or(s.drift);
            for x in dist.sample_with(to - from, &mut rng) {
                let t = out.len();
                let beta_term = market.map_or(0.0, |m| s.market_beta * m[t]);
                out.push(drift + beta_term + s.vol * (x - center));
            }
        }
        out
    }
}

fn compound(initial: f64, log_returns: &[f64]) -> Vec<f64> {
    let mut prices = Vec::with_capacity(log_returns.len() + 1);
    prices.push(initial);
    let mut log_price = initial.ln();
    for r in log_returns {
        log_price += r;
        prices.push(log_price.exp());
    }
    prices
}

fn series_csv(series: &PriceSeries) -> String {
    let mut out = String::from("date,adj_close\n");
    for (d, p) in series.dates.iter().zip(&series.adj_close) {
        out.push_str(&format!("{d},{p}\n"));
    }
    out
}

/// Write `<name>.csv` per series plus `manifest.csv` into `dir`.
pub fn write_universe(dir: &Path, universe: &SimulatedUniverse) -> Result<(), SimulationError> {
    let io = |path: &Path, e: std::io::Error| SimulationError::Io(format!("{}: {e}", path.display()));
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut manifest = String::from("ticker,path,constituent\n");
    let all = std::iter::once((&universe.market, false)).chain(universe.tickers.iter().map(|t| (t, true)));
    for (series, constituent) in all {
        let file = format!("{}.csv", series.ticker);
        let path = dir.join(&file);
        fs::write(&path, series_csv(series)).map_err(|e| io(&path, e))?;
        manifest.push_str(&format!("{},{file},{constituent}\n", series.ticker));
    }
    let path = dir.join("manifest.csv");
    fs::write(&path, manifest).map_err(|e| io(&path, e))
}
