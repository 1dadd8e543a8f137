#![allow(dead_code)]

use atre_core::backtest::config::{BacktestConfig, BinSpecConfig, CumulativeConfig, CycleConfig, KsConfig, PercentileTrackConfig, StrategySpec};
use atre_core::distributions::QGaussianParams;
use atre_core::entropy::RiskKind;
use atre_core::simulate::{SeriesSpec, SimulationSpec};
use chrono::NaiveDate;

pub fn p(q: f64, b: f64) -> QGaussianParams {
    QGaussianParams::new(q, b).unwrap()
}

/// A 700-day universe: twelve generated tickers, a market clone and a
/// rescaled copy of one ticker.
pub fn small_spec(seed: u64) -> SimulationSpec {
    let mut tickers: Vec<SeriesSpec> = (0..12)
        .map(|i| {
            let f = i as f64 / 11.0;
            let mut s = SeriesSpec::new(format!("T{i:02}"), p(1.25 + 0.4 * f, 1.0), p(1.2 + 0.25 * f, 1.2));
            s.drift = 0.0002 * f;
            s.vol = 0.008 + 0.01 * f;
            s.market_beta = 0.5;
            s
        })
        .collect();
    tickers.push(SeriesSpec::clone_of("CLONE", "MKT"));
    let mut scaled = SeriesSpec::clone_of("T03X7", "T03");
    scaled.initial_price = 700.0;
    tickers.push(scaled);
    SimulationSpec {
        seed,
        start_date: NaiveDate::from_ymd_opt(2005, 1, 3).unwrap(),
        days: 700,
        market: SeriesSpec::new("MKT", p(1.45, 1.0), p(1.3, 1.1)),
        tickers,
    }
}

pub fn small_config() -> BacktestConfig {
    BacktestConfig {
        cycle: CycleConfig {
            window: 300,
            fit_lag: 10,
            horizon: 63,
            shift: 63,
            risk_kind: RiskKind::Atre,
            bin_spec: BinSpecConfig {
                target_per_bin: 4,
                extra_high_bins: 2,
            },
            master_seed: 11,
        },
        ks: KsConfig { replicates: 0 },
        percentile_track: Some(PercentileTrackConfig::default()),
        cumulative: Some(CumulativeConfig {
            span: 126,
            step: 21,
            k_stocks: 3,
            strategies: vec![
                StrategySpec {
                    kind: RiskKind::SMinus,
                    percentile: Some(90.0),
                    fixed_risk: None,
                },
                StrategySpec {
                    kind: RiskKind::Atre,
                    percentile: None,
                    fixed_risk: Some(0.5),
                },
            ],
        }),
        ..BacktestConfig::default()
    }
}
