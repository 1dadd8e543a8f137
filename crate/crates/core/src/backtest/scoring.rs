//! Per-date model fits and risk scores for the market and each constituent.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::capm::capm_beta;
use super::prices::lagged_returns;
use super::universe::{AlignedSeries, Universe};
use crate::distributions::AsymmetricDist;
use crate::entropy::{branch_entropy_of, tre_symmetric, RiskKind};
use crate::estimation::{fit_asymmetric, fit_symmetric, fit_symmetric_fixed_q, FitDiagnostics, FitOptions, StandardizedSample};

/// Why a ticker contributes no risk value at some date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", content = "detail", rename_all = "snake_case")]
pub enum Exclusion {
    InsufficientHistory,
    MissingForwardPrice,
    FitFailed(String),
    DomainError(String),
    CapmFailed(String),
    AboveTopBin(f64),
}

impl Exclusion {
    pub fn code(&self) -> &'static str {
        match self {
            Exclusion::InsufficientHistory => "insufficient_history",
            Exclusion::MissingForwardPrice => "missing_forward_price",
            Exclusion::FitFailed(_) => "fit_failed",
            Exclusion::DomainError(_) => "domain_error",
            Exclusion::CapmFailed(_) => "capm_failed",
            Exclusion::AboveTopBin(_) => "above_top_bin",
        }
    }

    pub fn detail(&self) -> String {
        match self {
            Exclusion::InsufficientHistory | Exclusion::MissingForwardPrice => String::new(),
            Exclusion::FitFailed(d) | Exclusion::DomainError(d) | Exclusion::CapmFailed(d) => d.clone(),
            Exclusion::AboveTopBin(risk) => format!("risk {risk}"),
        }
    }
}

impl fmt::Display for Exclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let detail = self.detail();
        if detail.is_empty() {
            f.write_str(self.code())
        } else {
            write!(f, "{}: {detail}", self.code())
        }
    }
}

/// Reference model fitted to the market window ending at one date.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketModel {
    pub dist: AsymmetricDist,
    pub diagnostics: FitDiagnostics,
    /// Symmetric fit `(q, b)`; `b` is refitted at fixed `q` by the same
    /// routine used for constituents.
    pub sym_q: f64,
    pub sym_b: f64,
    /// Raw lagged returns of the window.
    pub returns: Vec<f64>,
    pub sample: StandardizedSample,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSet {
    pub dist: AsymmetricDist,
    values: BTreeMap<RiskKind, Result<f64, Exclusion>>,
}

impl ScoreSet {
    pub fn get(&self, kind: RiskKind) -> Result<f64, Exclusion> {
        self.values[&kind].clone()
    }
}

pub type TickerScore = Result<ScoreSet, Exclusion>;

fn window_returns(prices: &[f64], lag: usize) -> Result<Vec<f64>, String> {
    lagged_returns(prices, lag).map_err(|e| e.to_string())
}

pub fn fit_market(universe: &Universe, window: usize, lag: usize, index: usize) -> Result<MarketModel, Exclusion> {
    if index < window {
        return Err(Exclusion::InsufficientHistory);
    }
    let returns = window_returns(universe.market_slice(index - window, index), lag).map_err(Exclusion::FitFailed)?;
    let fit = fit_asymmetric(&returns, &FitOptions::mle_only()).map_err(|e| Exclusion::FitFailed(e.to_string()))?;
    let values = fit.sample.values();
    let sym_q = fit_symmetric(values, &FitOptions::mle_only())
        .map_err(|e| Exclusion::FitFailed(e.to_string()))?
        .params
        .q();
    let sym_b = fit_symmetric_fixed_q(values, sym_q)
        .map_err(|e| Exclusion::FitFailed(e.to_string()))?
        .params
        .b();
    Ok(MarketModel {
        dist: fit.dist,
        diagnostics: fit.diagnostics,
        sym_q,
        sym_b,
        returns,
        sample: fit.sample.clone(),
    })
}

pub fn score_ticker(series: &AlignedSeries, market: &MarketModel, window: usize, lag: usize, index: usize) -> TickerScore {
    if index < window {
        return Err(Exclusion::InsufficientHistory);
    }
    let prices = series.slice(index - window, index).ok_or(Exclusion::InsufficientHistory)?;
    let returns = window_returns(&prices, lag).map_err(Exclusion::FitFailed)?;
    let fit = fit_asymmetric(&returns, &FitOptions::mle_only()).map_err(|e| Exclusion::FitFailed(e.to_string()))?;
    let reference = &market.dist;
    let domain = |e: crate::entropy::EntropyError| Exclusion::DomainError(e.to_string());
    let s_minus = branch_entropy_of(&reference.neg, &fit.dist.neg).map_err(domain);
    let s_plus = branch_entropy_of(&reference.pos, &fit.dist.pos).map_err(domain);
    let atre = match (&s_minus, &s_plus) {
        (Ok(a), Ok(b)) => Ok(a + b),
        (Err(e), _) | (_, Err(e)) => Err(e.clone()),
    };
    let tre = fit_symmetric_fixed_q(fit.sample.values(), market.sym_q)
        .map_err(|e| Exclusion::FitFailed(e.to_string()))
        .and_then(|f| tre_symmetric(market.sym_q, market.sym_b, f.params.b()).map_err(domain));
    let beta = capm_beta(&returns, &market.returns).map_err(|e| Exclusion::CapmFailed(e.to_string()));
    let values = BTreeMap::from([
        (RiskKind::Atre, atre),
        (RiskKind::SMinus, s_minus),
        (RiskKind::SPlus, s_plus),
        (RiskKind::TreSym, tre),
        (RiskKind::CapmBeta, beta),
    ]);
    Ok(ScoreSet { dist: fit.dist, values })
}

/// Market model and constituent scores at one calendar index.
#[derive(Debug, Clone, PartialEq)]
pub struct DateScores {
    pub market: Result<MarketModel, Exclusion>,
    /// Parallel to `Universe::tickers`.
    pub tickers: Vec<TickerScore>,
}

/// Scores at each requested calendar index. Work is spread over the current
/// rayon pool; results do not depend on scheduling.
pub fn score_dates(universe: &Universe, window: usize, lag: usize, indices: &[usize]) -> BTreeMap<usize, DateScores> {
    let markets: Vec<Result<MarketModel, Exclusion>> =
        indices.par_iter().map(|&i| fit_market(universe, window, lag, i)).collect();
    let pairs: Vec<(usize, usize)> = (0..indices.len())
        .flat_map(|d| (0..universe.tickers.len()).map(move |t| (d, t)))
        .collect();
    let scores: Vec<TickerScore> = pairs
        .par_iter()
        .map(|&(d, t)| match &markets[d] {
            Ok(market) => score_ticker(&universe.tickers[t], market, window, lag, indices[d]),
            Err(e) => Err(Exclusion::FitFailed(format!("market: {e}"))),
        })
        .collect();
    let mut scores = scores.into_iter();
    indices
        .iter()
        .zip(markets)
        .map(|(&index, market)| {
            let tickers = scores.by_ref().take(universe.tickers.len()).collect();
            (index, DateScores { market, tickers })
        })
        .collect()
}
