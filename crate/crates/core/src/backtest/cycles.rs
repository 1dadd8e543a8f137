//! Rolling six-month cycles: score, bin, and measure forward excess returns.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::bins::{build_bins, BinError, BinSpec};
use super::config::CycleConfig;
use super::scoring::{DateScores, Exclusion, MarketModel};
use super::universe::Universe;
use crate::distributions::QGaussianParams;
use crate::estimation::{ks_test, KsResult};
use crate::seed::derive_seed;
use crate::stats::mean;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CycleError {
    #[error("series of {len} prices is too short for one cycle (window {window}, horizon {horizon})")]
    NoCycles { len: usize, window: usize, horizon: usize },
    #[error("market fit failed in every cycle")]
    AllMarketFitsFailed,
    #[error("first cycle bins: {0}")]
    Bins(#[from] BinError),
}

/// Calendar indices of cycle starts: the first index with a full
/// estimation window, then every `shift` days while the forward horizon
/// still fits in the data.
pub fn cycle_starts(len: usize, window: usize, horizon: usize, shift: usize) -> Vec<usize> {
    let mut starts = Vec::new();
    let mut s = window;
    while s + horizon < len {
        starts.push(s);
        s += shift;
    }
    starts
}

/// Market model summary kept in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketSummary {
    pub neg: QGaussianParams,
    pub pos: QGaussianParams,
    pub n_neg: usize,
    pub n_pos: usize,
    pub sym_q: f64,
    pub sym_b: f64,
    pub ks: Option<KsResult>,
}

impl MarketSummary {
    fn new(model: &MarketModel, ks: Option<KsResult>) -> Self {
        Self {
            neg: model.dist.neg,
            pos: model.dist.pos,
            n_neg: model.diagnostics.n_neg,
            n_pos: model.diagnostics.n_pos,
            sym_q: model.sym_q,
            sym_b: model.sym_b,
            ks,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub ticker: String,
    pub bin: usize,
    pub risk: f64,
    pub forward_return: f64,
    pub excess_return: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleResult {
    pub cycle: usize,
    pub start_index: usize,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    /// `None` when the market fit failed; the cycle is then skipped.
    pub market: Option<MarketSummary>,
    pub market_failure: Option<String>,
    pub market_forward_return: f64,
    pub n_universe: usize,
    pub n_admitted: usize,
    pub n_binned: usize,
    /// Admitted tickers left out of the bins.
    pub n_excluded: usize,
    pub bin_counts: Vec<usize>,
    /// Mean member forward return minus the market's; `None` if empty.
    pub bin_excess: Vec<Option<f64>>,
    pub members: Vec<Member>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExclusionRecord {
    pub ticker: String,
    pub cycle: usize,
    pub date: NaiveDate,
    #[serde(flatten)]
    pub reason: Exclusion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleRun {
    pub bins: BinSpec,
    pub cycles: Vec<CycleResult>,
    pub exclusions: Vec<ExclusionRecord>,
}

fn forward_return(start: f64, end: f64) -> f64 {
    (end - start) / start
}

struct Scored {
    ticker: usize,
    risk: f64,
    forward_return: f64,
}

/// Admission and scoring for one cycle: admitted tickers with a usable
/// risk value, plus exclusion records. Returns `(admitted, scored)`.
fn admit(
    universe: &Universe,
    config: &CycleConfig,
    cycle: usize,
    start: usize,
    scores: &DateScores,
    exclusions: &mut Vec<ExclusionRecord>,
) -> (usize, Vec<Scored>) {
    let date = universe.market.dates[start];
    let end = start + config.horizon;
    let mut admitted = 0;
    let mut scored = Vec::new();
    for (t, series) in universe.tickers.iter().enumerate() {
        let mut exclude = |reason| {
            exclusions.push(ExclusionRecord {
                ticker: series.ticker.clone(),
                cycle,
                date,
                reason,
            })
        };
        if !series.complete(start - config.window, start) {
            exclude(Exclusion::InsufficientHistory);
            continue;
        }
        let Some(end_price) = series.price(end) else {
            exclude(Exclusion::MissingForwardPrice);
            continue;
        };
        admitted += 1;
        match scores.tickers[t].as_ref().map(|s| s.get(config.risk_kind)) {
            Ok(Ok(risk)) => scored.push(Scored {
                ticker: t,
                risk,
                forward_return: forward_return(series.price(start).expect("admitted"), end_price),
            }),
            Ok(Err(reason)) => exclude(reason),
            Err(reason) => exclude(reason.clone()),
        }
    }
    (admitted, scored)
}

/// Run every cycle. Bins are built from the first cycle whose market fit
/// succeeds and stay fixed afterwards.
pub fn run_cycles(
    universe: &Universe,
    config: &CycleConfig,
    ks_replicates: usize,
    scores: &BTreeMap<usize, DateScores>,
) -> Result<CycleRun, CycleError> {
    let len = universe.market.len();
    let starts = cycle_starts(len, config.window, config.horizon, config.shift);
    if starts.is_empty() {
        return Err(CycleError::NoCycles {
            len,
            window: config.window,
            horizon: config.horizon,
        });
    }
    let mut bins: Option<BinSpec> = None;
    let mut cycles = Vec::with_capacity(starts.len());
    let mut exclusions = Vec::new();
    for (k, &start) in starts.iter().enumerate() {
        let date_scores = &scores[&start];
        let end = start + config.horizon;
        let market_forward = forward_return(universe.market.adj_close[start], universe.market.adj_close[end]);
        let mut result = CycleResult {
            cycle: k,
            start_index: start,
            start_date: universe.market.dates[start],
            end_date: universe.market.dates[end],
            market: None,
            market_failure: None,
            market_forward_return: market_forward,
            n_universe: universe.tickers.len(),
            n_admitted: 0,
            n_binned: 0,
            n_excluded: 0,
            bin_counts: Vec::new(),
            bin_excess: Vec::new(),
            members: Vec::new(),
        };
        let model = match &date_scores.market {
            Ok(model) => model,
            Err(e) => {
                log::warn!("cycle {k}: market fit failed: {e}");
                result.market_failure = Some(e.to_string());
                cycles.push(result);
                continue;
            }
        };
        let ks = (ks_replicates > 0)
            .then(|| ks_test(&model.sample, &model.dist, ks_replicates, derive_seed(config.master_seed, "ks-market", k as u64)))
            .and_then(|r| r.map_err(|e| log::warn!("cycle {k}: market KS failed: {e}")).ok());
        result.market = Some(MarketSummary::new(model, ks));

        let excluded_before = exclusions.len();
        let (admitted, scored) = admit(universe, config, k, start, date_scores, &mut exclusions);
        if bins.is_none() {
            let risks: Vec<f64> = scored.iter().map(|s| s.risk).collect();
            bins = Some(build_bins(&risks, config.bin_spec.target_per_bin, config.bin_spec.extra_high_bins)?);
        }
        let spec = bins.as_ref().expect("built above");
        let mut forward_by_bin: Vec<Vec<f64>> = vec![Vec::new(); spec.bin_count()];
        for s in scored {
            let ticker = &universe.tickers[s.ticker].ticker;
            match spec.assign(s.risk) {
                Some(bin) => {
                    forward_by_bin[bin].push(s.forward_return);
                    result.members.push(Member {
                        ticker: ticker.clone(),
                        bin,
                        risk: s.risk,
                        forward_return: s.forward_return,
                        excess_return: s.forward_return - market_forward,
                    });
                }
                None => exclusions.push(ExclusionRecord {
                    ticker: ticker.clone(),
                    cycle: k,
                    date: result.start_date,
                    reason: Exclusion::AboveTopBin(s.risk),
                }),
            }
        }
        result.n_admitted = admitted;
        result.n_binned = result.members.len();
        result.n_excluded = exclusions[excluded_before..]
            .iter()
            .filter(|e| !matches!(e.reason, Exclusion::InsufficientHistory | Exclusion::MissingForwardPrice))
            .count();
        result.bin_counts = forward_by_bin.iter().map(Vec::len).collect();
        result.bin_excess = forward_by_bin
            .iter()
            .map(|f| (!f.is_empty()).then(|| mean(f) - market_forward))
            .collect();
        cycles.push(result);
    }
    let bins = bins.ok_or(CycleError::AllMarketFitsFailed)?;
    Ok(CycleRun {
        bins,
        cycles,
        exclusions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backtest::calendar::trading_days_between;

    #[test]
    fn start_arithmetic() {
        assert_eq!(cycle_starts(10, 3, 2, 2), vec![3, 5, 7]);
        assert_eq!(cycle_starts(5, 3, 2, 2), Vec::<usize>::new());
        assert_eq!(cycle_starts(1400 + 8 * 126 + 1, 1400, 126, 126).len(), 8);
    }

    #[test]
    fn operating_span_gives_42_cycles() {
        let d = |y, m, day| NaiveDate::from_ymd_opt(y, m, day).unwrap();
        let days = trading_days_between(d(2000, 9, 18), d(2021, 11, 24));
        assert_eq!(cycle_starts(days.len(), 0, 126, 126).len(), 42);
    }
}
