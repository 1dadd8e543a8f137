//! `atre`: fit q-Gaussian return models, score relative-entropy risk, run
//! the rolling-cycle backtest and generate synthetic universes.

mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use atre_core::entropy::RiskKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use error::{CliResult, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "atre", version, about = "Asymmetric Tsallis relative entropy risk engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit an asymmetric q-Gaussian to one price series.
    Fit(FitArgs),
    /// Relative-entropy risk of an equity fit against a market fit.
    Risk(RiskArgs),
    /// Run the rolling-cycle backtest and write the report bundle.
    Backtest(BacktestArgs),
    /// Generate a synthetic price universe.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CliRiskKind {
    Atre,
    SMinus,
    SPlus,
    Tre,
    Beta,
}

impl From<CliRiskKind> for RiskKind {
    fn from(kind: CliRiskKind) -> Self {
        match kind {
            CliRiskKind::Atre => RiskKind::Atre,
            CliRiskKind::SMinus => RiskKind::SMinus,
            CliRiskKind::SPlus => RiskKind::SPlus,
            CliRiskKind::Tre => RiskKind::TreSym,
            CliRiskKind::Beta => RiskKind::CapmBeta,
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV with `date,adj_close` columns.
    #[arg(long)]
    pub prices: PathBuf,
    /// Ticker recorded in the output; defaults to the file stem.
    #[arg(long)]
    pub ticker: Option<String>,
    /// Return lag in trading days.
    #[arg(long, default_value_t = 10)]
    pub lag: usize,
    /// Daily steps in the fit window, ending at the last price; all data if omitted.
    #[arg(long)]
    pub window: Option<usize>,
    /// Market fit JSON; adds a symmetric fit at the market's q for TRE scoring.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Parametric-bootstrap replicates for the KS critical value; 0 skips the test.
    #[arg(long, default_value_t = 100)]
    pub ks_replicates: usize,
    /// Bootstrap resamples per branch for standard errors; 0 skips them.
    #[arg(long, default_value_t = 50)]
    pub bootstrap: usize,
    /// Write the JSON here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RiskArgs {
    /// Fit JSON of the reference (market).
    #[arg(long)]
    pub market: PathBuf,
    /// Fit JSON of the equity.
    #[arg(long)]
    pub equity: PathBuf,
    #[arg(long, value_enum, default_value_t = CliRiskKind::Atre)]
    pub risk_kind: CliRiskKind,
}

#[derive(Debug, Args)]
pub struct BacktestArgs {
    /// Universe manifest CSV (`ticker,path,constituent`).
    #[arg(long)]
    pub manifest: PathBuf,
    /// TOML configuration; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for the report bundle.
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides `master_seed` from the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `risk_kind` from the config.
    #[arg(long, value_enum)]
    pub risk_kind: Option<CliRiskKind>,
    /// Worker threads; all cores if omitted.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// TOML simulation spec.
    #[arg(long)]
    pub spec: PathBuf,
    /// Directory for the price CSVs and manifest.
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides `seed` from the simulation file.
    #[arg(long)]
    pub seed: Option<u64>,
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Fit(args) => commands::fit::run(&args),
        Command::Risk(args) => commands::risk::run(&args),
        Command::Backtest(args) => commands::backtest::run(&args),
        Command::Simulate(args) => commands::simulate::run(&args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
