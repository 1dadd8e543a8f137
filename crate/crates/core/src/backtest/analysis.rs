//! Monthly risk-percentile tracking and long-horizon cumulative earnings.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::{CumulativeConfig, CycleConfig, PercentileTrackConfig, StrategySpec, Target};
use super::scoring::DateScores;
use super::universe::Universe;
use crate::entropy::RiskKind;
use crate::stats::{mean, median, quantile_sorted, sample_std};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("{len} prices cannot hold a {span}-day span after a {window}-day window")]
    InsufficientSpan { len: usize, window: usize, span: usize },
}

/// Calendar indices `window, window + step, ...` below `end`.
pub fn monthly_grid(window: usize, step: usize, end: usize) -> Vec<usize> {
    (window..end).step_by(step).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercentilePoint {
    pub index: usize,
    pub date: NaiveDate,
    pub kind: RiskKind,
    /// `None` when no ticker could be scored (for example a failed market fit).
    pub value: Option<f64>,
    pub n_scored: usize,
}

/// Risk values of tickers holding a full pre-window at `index`, in ticker order.
fn scored_risks(universe: &Universe, window: usize, index: usize, scores: &DateScores, kind: RiskKind) -> Vec<(usize, f64)> {
    universe
        .tickers
        .iter()
        .enumerate()
        .filter(|(_, s)| s.complete(index - window, index))
        .filter_map(|(t, _)| {
            let risk = scores.tickers[t].as_ref().ok()?.get(kind).ok()?;
            Some((t, risk))
        })
        .collect()
}

fn percentile_of(risks: &[f64], percentile: f64) -> Option<f64> {
    if risks.is_empty() {
        return None;
    }
    let mut sorted = risks.to_vec();
    sorted.sort_by(f64::total_cmp);
    Some(quantile_sorted(&sorted, percentile / 100.0))
}

/// Cross-sectional percentile of each risk kind on a monthly grid. Points
/// are ordered by date, then by the configured kind order.
pub fn percentile_track(
    universe: &Universe,
    cycle: &CycleConfig,
    track: &PercentileTrackConfig,
    scores: &BTreeMap<usize, DateScores>,
) -> Vec<PercentilePoint> {
    let mut points = Vec::new();
    for index in monthly_grid(cycle.window, track.step, universe.market.len()) {
        let date_scores = &scores[&index];
        for &kind in &track.kinds {
            let risks: Vec<f64> = scored_risks(universe, cycle.window, index, date_scores, kind)
                .into_iter()
                .map(|(_, r)| r)
                .collect();
            points.push(PercentilePoint {
                index,
                date: universe.market.dates[index],
                kind,
                value: percentile_of(&risks, track.percentile),
                n_scored: risks.len(),
            });
        }
    }
    points
}

/// Start indices of the cumulative portfolios: every `step` days from the
/// first full window while the whole span fits.
pub fn cumulative_starts(len: usize, window: usize, span: usize, step: usize) -> Vec<usize> {
    (window..)
        .step_by(step)
        .take_while(|t0| t0 + span < len)
        .collect()
}

/// Every rebalance date any cumulative portfolio touches.
pub fn cumulative_leg_indices(len: usize, cycle: &CycleConfig, cum: &CumulativeConfig) -> Vec<usize> {
    let legs = cum.span / cycle.horizon;
    let mut indices: Vec<usize> = cumulative_starts(len, cycle.window, cum.span, cum.step)
        .into_iter()
        .flat_map(|t0| (0..legs).map(move |m| t0 + m * cycle.horizon))
        .collect();
    indices.sort_unstable();
    indices.dedup();
    indices
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulativePoint {
    pub strategy: String,
    pub start_date: NaiveDate,
    pub maturity_date: NaiveDate,
    pub portfolio_pct: f64,
    pub market_pct: f64,
    /// Legs that held the market because no ticker could be selected.
    pub fallback_legs: usize,
}

/// One row of the earnings statistics table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EarningsStats {
    pub label: String,
    pub mean_pct: f64,
    pub median_pct: f64,
    /// `None` with fewer than two starts.
    pub std_pct: Option<f64>,
    pub n_starts: usize,
}

impl EarningsStats {
    fn of(label: String, values: &[f64]) -> Self {
        Self {
            label,
            mean_pct: mean(values),
            median_pct: median(values),
            std_pct: (values.len() > 1).then(|| sample_std(values)),
            n_starts: values.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulativeReport {
    pub series: Vec<CumulativePoint>,
    /// One row per strategy, then the market.
    pub stats: Vec<EarningsStats>,
}

fn leg_return(start: f64, end: f64) -> f64 {
    (end - start) / start
}

/// Equal-weight forward return over one leg of the `k` tickers whose risk
/// is nearest the strategy target, or `None` if nothing is selectable.
fn leg(
    universe: &Universe,
    cycle: &CycleConfig,
    strategy: &StrategySpec,
    k: usize,
    index: usize,
    scores: &DateScores,
) -> Option<f64> {
    let end = index + cycle.horizon;
    let candidates: Vec<(usize, f64)> = scored_risks(universe, cycle.window, index, scores, strategy.kind)
        .into_iter()
        .filter(|&(t, _)| universe.tickers[t].price(end).is_some())
        .collect();
    let target = match strategy.target() {
        Target::FixedRisk(v) => v,
        Target::Percentile(p) => {
            let risks: Vec<f64> = candidates.iter().map(|&(_, r)| r).collect();
            percentile_of(&risks, p)?
        }
    };
    let mut ranked = candidates;
    // Stable sort keeps ticker order among equal distances.
    ranked.sort_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()));
    let returns: Vec<f64> = ranked
        .iter()
        .take(k)
        .map(|&(t, _)| {
            let series = &universe.tickers[t];
            leg_return(series.price(index).expect("complete window"), series.price(end).expect("filtered"))
        })
        .collect();
    (!returns.is_empty()).then(|| mean(&returns))
}

fn market_label(universe: &Universe) -> String {
    universe.market.ticker.clone()
}

/// Row labels: the risk kind alone unless two strategies share a kind.
fn strategy_labels(strategies: &[StrategySpec]) -> Vec<String> {
    strategies
        .iter()
        .map(|s| {
            if strategies.iter().filter(|o| o.kind == s.kind).count() == 1 {
                s.kind.label().to_string()
            } else {
                s.label()
            }
        })
        .collect()
}

/// Compound each strategy's rebalanced portfolio over `span` days from
/// every monthly start and compare with holding the market.
pub fn cumulative_earnings(
    universe: &Universe,
    cycle: &CycleConfig,
    cum: &CumulativeConfig,
    scores: &BTreeMap<usize, DateScores>,
) -> Result<CumulativeReport, AnalysisError> {
    let len = universe.market.len();
    let starts = cumulative_starts(len, cycle.window, cum.span, cum.step);
    if starts.is_empty() {
        return Err(AnalysisError::InsufficientSpan {
            len,
            window: cycle.window,
            span: cum.span,
        });
    }
    let legs = cum.span / cycle.horizon;
    let prices = &universe.market.adj_close;
    let market_growth: Vec<f64> = starts
        .iter()
        .map(|&t0| {
            (0..legs)
                .map(|m| t0 + m * cycle.horizon)
                .fold(1.0, |v, t| v * (1.0 + leg_return(prices[t], prices[t + cycle.horizon])))
        })
        .collect();

    let labels = strategy_labels(&cum.strategies);
    let mut series = Vec::new();
    let mut stats = Vec::new();
    for (strategy, label) in cum.strategies.iter().zip(labels) {
        let mut earnings = Vec::with_capacity(starts.len());
        for (&t0, &market) in starts.iter().zip(&market_growth) {
            let mut value = 1.0;
            let mut fallback_legs = 0;
            for t in (0..legs).map(|m| t0 + m * cycle.horizon) {
                let r = leg(universe, cycle, strategy, cum.k_stocks, t, &scores[&t]).unwrap_or_else(|| {
                    fallback_legs += 1;
                    leg_return(prices[t], prices[t + cycle.horizon])
                });
                value *= 1.0 + r;
            }
            if fallback_legs > 0 {
                log::warn!("{label}: {fallback_legs} legs from {} held the market", universe.market.dates[t0]);
            }
            let pct = 100.0 * (value - 1.0);
            earnings.push(pct);
            series.push(CumulativePoint {
                strategy: label.clone(),
                start_date: universe.market.dates[t0],
                maturity_date: universe.market.dates[t0 + cum.span],
                portfolio_pct: pct,
                market_pct: 100.0 * (market - 1.0),
                fallback_legs,
            });
        }
        stats.push(EarningsStats::of(label, &earnings));
    }
    let market_pct: Vec<f64> = market_growth.iter().map(|g| 100.0 * (g - 1.0)).collect();
    stats.push(EarningsStats::of(market_label(universe), &market_pct));
    Ok(CumulativeReport { series, stats })
}
