mod common;

use atre_core::backtest::analysis::{cumulative_earnings, cumulative_leg_indices, monthly_grid, percentile_track};
use atre_core::backtest::config::{CumulativeConfig, PercentileTrackConfig, StrategySpec};
use atre_core::backtest::cycles::cycle_starts;
use atre_core::backtest::report::{read_report, render_bundle, run_backtest, write_bundle, BUNDLE_FILES};
use atre_core::backtest::scoring::score_dates;
use atre_core::backtest::{Exclusion, PriceSeries, Universe};
use atre_core::entropy::RiskKind;
use atre_core::simulate::{Regime, SeriesSpec, SimulationSpec};
use common::{p, small_config, small_spec};

fn small_universe() -> Universe {
    let mut sim = small_spec(5).generate().unwrap();
    // A late listing: no full pre-window in the first cycles.
    let late = &sim.tickers[5];
    sim.tickers.push(
        PriceSeries::new("LATE", late.dates[250..].to_vec(), late.adj_close[250..].to_vec()).unwrap(),
    );
    sim.to_universe().unwrap()
}

#[test]
fn clone_is_neutral_and_membership_is_conserved() {
    let universe = small_universe();
    let report = run_backtest(&universe, &small_config(), Some(1)).unwrap();
    assert_eq!(report.cycles.len(), 6);
    for cycle in &report.cycles {
        assert!(cycle.market.is_some(), "cycle {} market failed", cycle.cycle);
        let clone = cycle.members.iter().find(|m| m.ticker == "CLONE").expect("clone binned");
        assert_eq!(clone.risk, 0.0);
        assert_eq!(clone.excess_return, 0.0);

        assert_eq!(cycle.n_binned + cycle.n_excluded, cycle.n_admitted);
        assert_eq!(cycle.bin_counts.iter().sum::<usize>(), cycle.n_binned);
        let recorded = report.exclusions.iter().filter(|e| e.cycle == cycle.cycle).count();
        assert_eq!(recorded, cycle.n_universe - cycle.n_admitted + cycle.n_excluded);
    }
    let late: Vec<_> = report.exclusions.iter().filter(|e| e.ticker == "LATE").collect();
    assert!(!late.is_empty());
    assert!(late.iter().all(|e| e.reason == Exclusion::InsufficientHistory));
    let last = report.cycles.last().unwrap().cycle;
    assert!(late.iter().all(|e| e.cycle < last));
    let fit = report.fit.expect("profile fit");
    assert!(fit.chi2 <= 1.0);
}

#[test]
fn clone_scores_zero_for_every_entropy_kind() {
    let universe = small_universe();
    let config = small_config();
    let c = &config.cycle;
    let starts = cycle_starts(universe.market.len(), c.window, c.horizon, c.shift);
    let scores = score_dates(&universe, c.window, c.fit_lag, &starts);
    let clone = universe.tickers.iter().position(|t| t.ticker == "CLONE").unwrap();
    for date in scores.values() {
        let set = date.tickers[clone].as_ref().unwrap();
        for kind in RiskKind::ALL.into_iter().filter(|k| k.is_entropy()) {
            assert_eq!(set.get(kind), Ok(0.0), "{kind:?}");
        }
        let beta = set.get(RiskKind::CapmBeta).unwrap();
        assert!((beta - 1.0).abs() < 1e-12, "beta {beta}");
    }
}

#[test]
fn rescaled_prices_leave_scores_unchanged() {
    let universe = small_universe();
    let config = small_config();
    let c = &config.cycle;
    let starts = cycle_starts(universe.market.len(), c.window, c.horizon, c.shift);
    let scores = score_dates(&universe, c.window, c.fit_lag, &starts);
    let idx = |name: &str| universe.tickers.iter().position(|t| t.ticker == name).unwrap();
    let (a, b) = (idx("T03"), idx("T03X7"));
    for date in scores.values() {
        let (sa, sb) = (date.tickers[a].as_ref().unwrap(), date.tickers[b].as_ref().unwrap());
        for kind in RiskKind::ALL {
            let (x, y) = (sa.get(kind).unwrap(), sb.get(kind).unwrap());
            assert!((x - y).abs() <= 1e-6 * x.abs().max(1e-3), "{kind:?}: {x} vs {y}");
        }
    }
    let report = run_backtest(&universe, &config, Some(1)).unwrap();
    for cycle in &report.cycles {
        let find = |name: &str| cycle.members.iter().find(|m| m.ticker == name).map(|m| m.forward_return);
        if let (Some(x), Some(y)) = (find("T03"), find("T03X7")) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}

#[test]
fn output_is_independent_of_thread_count() {
    let universe = small_universe();
    let config = small_config();
    let one = render_bundle(&run_backtest(&universe, &config, Some(1)).unwrap()).unwrap();
    let three = render_bundle(&run_backtest(&universe, &config, Some(3)).unwrap()).unwrap();
    assert_eq!(one, three);
}

#[test]
fn report_round_trips_and_rewrites_identically() {
    let universe = small_universe();
    let report = run_backtest(&universe, &small_config(), Some(1)).unwrap();
    let json = serde_json::to_string(&report).unwrap();
    assert_eq!(serde_json::from_str::<atre_core::backtest::BacktestReport>(&json).unwrap(), report);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    write_bundle(&out, &report).unwrap();
    let first: Vec<Vec<u8>> = BUNDLE_FILES.iter().map(|f| std::fs::read(out.join(f)).unwrap()).collect();
    write_bundle(&out, &report).unwrap();
    let second: Vec<Vec<u8>> = BUNDLE_FILES.iter().map(|f| std::fs::read(out.join(f)).unwrap()).collect();
    assert_eq!(first, second);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1, "staging left behind");
    assert_eq!(read_report(&out.join("report.json")).unwrap(), report);

    let stats = String::from_utf8(first[4].clone()).unwrap();
    let mut lines = stats.lines();
    assert_eq!(
        lines.next().unwrap(),
        "Relative Entropy (risk),% Earnings (Mean),% Earnings (Median),Standard Deviation"
    );
    let labels: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(labels, vec!["Asymmetric (S_-)", "Asymmetric (S_- + S_+)", "MKT"]);
}

fn clone_universe() -> Universe {
    let mut spec = small_spec(2);
    spec.tickers = (0..6).map(|i| SeriesSpec::clone_of(format!("C{i}"), "MKT")).collect();
    spec.generate().unwrap().to_universe().unwrap()
}

#[test]
fn clone_universe_earns_the_market() {
    let universe = clone_universe();
    let config = small_config();
    let cum = CumulativeConfig {
        strategies: vec![
            StrategySpec {
                kind: RiskKind::SMinus,
                percentile: Some(90.0),
                fixed_risk: None,
            },
            StrategySpec {
                kind: RiskKind::Atre,
                percentile: None,
                fixed_risk: Some(1.9),
            },
        ],
        ..config.cumulative.clone().unwrap()
    };
    let indices = cumulative_leg_indices(universe.market.len(), &config.cycle, &cum);
    let scores = score_dates(&universe, config.cycle.window, config.cycle.fit_lag, &indices);
    let result = cumulative_earnings(&universe, &config.cycle, &cum, &scores).unwrap();
    assert!(!result.series.is_empty());
    for point in &result.series {
        assert_eq!(point.portfolio_pct, point.market_pct, "{point:?}");
        assert_eq!(point.fallback_legs, 0);
    }
    assert_eq!(result.stats.len(), 3);
    assert_eq!(result.stats[0].mean_pct, result.stats[2].mean_pct);

    let track = PercentileTrackConfig::default();
    let grid = monthly_grid(config.cycle.window, track.step, universe.market.len());
    let scores = score_dates(&universe, config.cycle.window, config.cycle.fit_lag, &grid);
    let points = percentile_track(&universe, &config.cycle, &track, &scores);
    assert_eq!(points.len(), grid.len() * track.kinds.len());
    assert!(points.iter().all(|pt| pt.value == Some(0.0) && pt.n_scored == 6));
}

#[test]
fn percentile_100_is_the_cross_sectional_maximum() {
    let universe = small_universe();
    let config = small_config();
    let track = PercentileTrackConfig {
        percentile: 100.0,
        ..PercentileTrackConfig::default()
    };
    let grid = monthly_grid(config.cycle.window, track.step, universe.market.len());
    let scores = score_dates(&universe, config.cycle.window, config.cycle.fit_lag, &grid);
    for point in percentile_track(&universe, &config.cycle, &track, &scores) {
        let max = scores[&point.index]
            .tickers
            .iter()
            .filter_map(|s| s.as_ref().ok()?.get(point.kind).ok())
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(point.value, Some(max));
    }
}

#[test]
fn downside_regime_shift_raises_s_minus_percentile() {
    let shift_day = 900;
    let tickers = (0..10)
        .map(|i| {
            let mut s = SeriesSpec::new(format!("R{i}"), p(1.25, 1.0), p(1.3, 1.0));
            s.regimes.push(Regime {
                from_day: shift_day,
                neg: p(1.8, 1.0),
                pos: p(1.3, 1.0),
                drift: None,
            });
            s
        })
        .collect();
    let spec = SimulationSpec {
        seed: 21,
        start_date: chrono::NaiveDate::from_ymd_opt(2003, 1, 2).unwrap(),
        days: 1500,
        market: SeriesSpec::new("MKT", p(1.35, 1.0), p(1.3, 1.0)),
        tickers,
    };
    let universe = spec.generate().unwrap().to_universe().unwrap();
    let mut config = small_config();
    config.cycle.window = 500;
    let track = PercentileTrackConfig {
        kinds: vec![RiskKind::SMinus],
        step: 63,
        ..PercentileTrackConfig::default()
    };
    let grid = monthly_grid(config.cycle.window, track.step, universe.market.len());
    let scores = score_dates(&universe, config.cycle.window, config.cycle.fit_lag, &grid);
    let points = percentile_track(&universe, &config.cycle, &track, &scores);
    let mean_where = |keep: &dyn Fn(usize) -> bool| {
        let v: Vec<f64> = points.iter().filter(|pt| keep(pt.index)).map(|pt| pt.value.unwrap()).collect();
        assert!(!v.is_empty());
        v.iter().sum::<f64>() / v.len() as f64
    };
    let before = mean_where(&|i| i <= shift_day);
    let after = mean_where(&|i| i >= shift_day + config.cycle.window);
    assert!(after > 2.0 * before, "before {before} after {after}");
}
