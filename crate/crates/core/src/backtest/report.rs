//! End-to-end backtest run and its on-disk bundle.

use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::analysis::{cumulative_earnings, cumulative_leg_indices, monthly_grid, percentile_track, CumulativeReport, PercentilePoint};
use super::bins::BinSpec;
use super::config::BacktestConfig;
use super::cycles::{cycle_starts, run_cycles, CycleResult, ExclusionRecord};
use super::profile::{aggregate_profile, linear_fit_chi2, LinearFit, ProfilePoint};
use super::scoring::score_dates;
use super::universe::Universe;
use super::BacktestError;

/// Bumped whenever a report field or CSV column changes.
pub const SCHEMA_VERSION: u32 = 1;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

impl InputFile {
    pub fn hash(path: &Path) -> io::Result<Self> {
        let mut file = fs::File::open(path)?;
        let mut hasher = Sha256::new();
        let mut buf = [0u8; 1 << 16];
        loop {
            let n = file.read(&mut buf)?;
            if n == 0 {
                break;
            }
            hasher.update(&buf[..n]);
        }
        let sha256 = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
        Ok(Self {
            path: path.display().to_string(),
            sha256,
        })
    }
}

/// Everything needed to reproduce a run. Paths are recorded as given.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: Option<InputFile>,
    pub manifest: InputFile,
    /// Price files in manifest order.
    pub inputs: Vec<InputFile>,
    pub output_dir: String,
    pub master_seed: u64,
    pub tool_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportNotes {
    pub returns: String,
    pub prices_per_window: usize,
    pub returns_per_window: usize,
    pub bin_rule: String,
}

impl ReportNotes {
    fn new(config: &BacktestConfig) -> Self {
        let c = &config.cycle;
        Self {
            returns: format!("overlapping {}-day percent returns", c.fit_lag),
            prices_per_window: c.window + 1,
            returns_per_window: c.window + 1 - c.fit_lag,
            bin_rule: "bin 0 is open below; risks above the top edge are excluded".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub run: Option<RunManifest>,
    pub config: BacktestConfig,
    pub notes: ReportNotes,
    pub market: String,
    pub tickers: Vec<String>,
    pub bins: BinSpec,
    pub cycles: Vec<CycleResult>,
    pub profile: Vec<ProfilePoint>,
    pub fit: Option<LinearFit>,
    pub fit_error: Option<String>,
    pub percentile_track: Option<Vec<PercentilePoint>>,
    pub cumulative: Option<CumulativeReport>,
    pub exclusions: Vec<ExclusionRecord>,
}

/// Run the full protocol on `jobs` worker threads (all cores when `None`).
/// Output does not depend on `jobs`.
pub fn run_backtest(universe: &Universe, config: &BacktestConfig, jobs: Option<usize>) -> Result<BacktestReport, BacktestError> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| BacktestError::ThreadPool(e.to_string()))?;
    pool.install(|| run(universe, config))
}

fn run(universe: &Universe, config: &BacktestConfig) -> Result<BacktestReport, BacktestError> {
    let c = &config.cycle;
    let len = universe.market.len();
    let mut indices: BTreeSet<usize> = cycle_starts(len, c.window, c.horizon, c.shift).into_iter().collect();
    if let Some(track) = &config.percentile_track {
        indices.extend(monthly_grid(c.window, track.step, len));
    }
    if let Some(cum) = &config.cumulative {
        indices.extend(cumulative_leg_indices(len, c, cum));
    }
    let indices: Vec<usize> = indices.into_iter().collect();
    log::info!("scoring {} tickers at {} dates", universe.tickers.len(), indices.len());
    let scores = score_dates(universe, c.window, c.fit_lag, &indices);

    let cycles = run_cycles(universe, c, config.ks.replicates, &scores)?;
    let profile = aggregate_profile(&cycles, config.profile.risk_cutoff)?;
    let s: Vec<f64> = profile.iter().map(|p| p.s).collect();
    let e: Vec<f64> = profile.iter().map(|p| p.e_rel).collect();
    let (fit, fit_error) = match linear_fit_chi2(&s, &e) {
        Ok(fit) => (Some(fit), None),
        Err(err) => (None, Some(err.to_string())),
    };
    let percentile_track = config.percentile_track.as_ref().map(|t| percentile_track(universe, c, t, &scores));
    let cumulative = config
        .cumulative
        .as_ref()
        .map(|cum| cumulative_earnings(universe, c, cum, &scores))
        .transpose()?;
    Ok(BacktestReport {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.into(),
        run: None,
        config: config.clone(),
        notes: ReportNotes::new(config),
        market: universe.market.ticker.clone(),
        tickers: universe.tickers.iter().map(|t| t.ticker.clone()).collect(),
        bins: cycles.bins,
        cycles: cycles.cycles,
        profile,
        fit,
        fit_error,
        percentile_track,
        cumulative,
        exclusions: cycles.exclusions,
    })
}

pub const BUNDLE_FILES: [&str; 6] = [
    "report.json",
    "profile.csv",
    "percentile.csv",
    "cumulative.csv",
    "stats.csv",
    "exclusions.csv",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, BacktestError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io_err = |e: csv::Error| BacktestError::Io(e.to_string());
    w.write_record(header).map_err(io_err)?;
    for row in rows {
        w.write_record(&row).map_err(io_err)?;
    }
    w.into_inner().map_err(|e| BacktestError::Io(e.to_string()))
}

pub const STATS_HEADER: [&str; 4] = [
    "Relative Entropy (risk)",
    "% Earnings (Mean)",
    "% Earnings (Median)",
    "Standard Deviation",
];

/// Serialized bundle contents, in `BUNDLE_FILES` order.
pub fn render_bundle(report: &BacktestReport) -> Result<Vec<(&'static str, Vec<u8>)>, BacktestError> {
    let mut json = serde_json::to_vec_pretty(report).map_err(|e| BacktestError::Io(e.to_string()))?;
    json.push(b'\n');

    let profile = csv_bytes(
        &["bin", "s", "e_rel", "n_cycles", "mean_members", "fit_line"],
        report.profile.iter().map(|p| {
            vec![
                p.bin.to_string(),
                p.s.to_string(),
                p.e_rel.to_string(),
                p.n_cycles.to_string(),
                p.mean_members.to_string(),
                opt(report.fit.map(|f| f.at(p.s))),
            ]
        }),
    )?;
    let percentile_level = report.config.percentile_track.as_ref().map(|t| t.percentile);
    let percentile = csv_bytes(
        &["date", "index", "kind", "percentile", "value", "n_scored"],
        report.percentile_track.iter().flatten().map(|p| {
            vec![
                p.date.to_string(),
                p.index.to_string(),
                p.kind.code().to_string(),
                opt(percentile_level),
                opt(p.value),
                p.n_scored.to_string(),
            ]
        }),
    )?;
    let cumulative = csv_bytes(
        &["strategy", "start_date", "maturity_date", "portfolio_pct", "market_pct", "fallback_legs"],
        report.cumulative.iter().flat_map(|c| &c.series).map(|p| {
            vec![
                p.strategy.clone(),
                p.start_date.to_string(),
                p.maturity_date.to_string(),
                p.portfolio_pct.to_string(),
                p.market_pct.to_string(),
                p.fallback_legs.to_string(),
            ]
        }),
    )?;
    let stats = csv_bytes(
        &STATS_HEADER,
        report.cumulative.iter().flat_map(|c| &c.stats).map(|s| {
            vec![
                s.label.clone(),
                s.mean_pct.to_string(),
                s.median_pct.to_string(),
                opt(s.std_pct),
            ]
        }),
    )?;
    let exclusions = csv_bytes(
        &["ticker", "cycle", "date", "reason", "detail"],
        report.exclusions.iter().map(|e| {
            vec![
                e.ticker.clone(),
                e.cycle.to_string(),
                e.date.to_string(),
                e.reason.code().to_string(),
                e.reason.detail(),
            ]
        }),
    )?;
    Ok(BUNDLE_FILES
        .into_iter()
        .zip([json, profile, percentile, cumulative, stats, exclusions])
        .collect())
}

fn io(path: &Path, e: io::Error) -> BacktestError {
    BacktestError::Io(format!("{}: {e}", path.display()))
}

/// Write the bundle into `dir`. Files are staged in a sibling directory and
/// moved in only once all of them are written; other files in `dir` are
/// left alone.
pub fn write_bundle(dir: &Path, report: &BacktestReport) -> Result<(), BacktestError> {
    let files = render_bundle(report)?;
    let name = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "bundle".into());
    let parent = dir.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let staging: PathBuf = parent.join(format!(".{name}.staging-{}", std::process::id()));
    let stage = || -> Result<(), BacktestError> {
        fs::create_dir_all(&staging).map_err(|e| io(&staging, e))?;
        for (file, bytes) in &files {
            let path = staging.join(file);
            fs::write(&path, bytes).map_err(|e| io(&path, e))?;
        }
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        for (file, _) in &files {
            fs::rename(staging.join(file), dir.join(file)).map_err(|e| io(dir, e))?;
        }
        Ok(())
    };
    let result = stage();
    let _ = fs::remove_dir_all(&staging);
    result
}

/// Read back a report written by [`write_bundle`].
pub fn read_report(path: &Path) -> Result<BacktestReport, BacktestError> {
    let text = fs::read_to_string(path).map_err(|e| io(path, e))?;
    serde_json::from_str(&text).map_err(|e| BacktestError::Io(format!("{}: {e}", path.display())))
}
