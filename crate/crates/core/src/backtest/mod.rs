//! The rolling-cycle backtest: price ingestion, per-cycle scoring, risk
//! bins, profiles, percentile tracking and cumulative earnings.

pub mod analysis;
pub mod bins;
pub mod calendar;
pub mod capm;
pub mod config;
pub mod cycles;
pub mod prices;
pub mod profile;
pub mod report;
pub mod scoring;
pub mod universe;

use thiserror::Error;

pub use analysis::{AnalysisError, CumulativePoint, CumulativeReport, EarningsStats, PercentilePoint};
pub use bins::{BinError, BinSpec};
pub use config::{BacktestConfig, ConfigError, CycleConfig};
pub use cycles::{CycleError, CycleResult, CycleRun, ExclusionRecord};
pub use prices::{load_prices, PriceError, PriceSeries, ReturnSeries};
pub use profile::{LinearFit, LinearFitError, ProfileError, ProfilePoint};
pub use report::{run_backtest, write_bundle, BacktestReport, RunManifest, SCHEMA_VERSION};
pub use scoring::Exclusion;
pub use universe::{load_universe, Universe, UniverseError};

#[derive(Debug, Error)]
pub enum BacktestError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Universe(#[from] UniverseError),
    #[error(transparent)]
    Cycles(#[from] CycleError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error("{0}")]
    Io(String),
}
