use std::fs;

use atre_core::backtest::cycles::CycleError;
use atre_core::backtest::report::{InputFile, BUNDLE_FILES, TOOL_VERSION};
use atre_core::backtest::{load_universe, run_backtest, write_bundle, BacktestConfig, BacktestError, RunManifest, SCHEMA_VERSION};

use crate::error::{CliError, CliResult};
use crate::output::{emit, hash, BacktestSummary};
use crate::BacktestArgs;

fn backtest_error(e: BacktestError) -> CliError {
    match e {
        BacktestError::Cycles(CycleError::AllMarketFitsFailed) | BacktestError::Profile(_) => CliError::fit(e),
        _ => CliError::io(e),
    }
}

pub fn run(args: &BacktestArgs) -> CliResult<()> {
    let (mut config, config_file) = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
            let config = BacktestConfig::from_toml(&text).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
            (config, Some(hash(path)?))
        }
        None => (BacktestConfig::default(), None),
    };
    if let Some(seed) = args.seed {
        config.cycle.master_seed = seed;
    }
    if let Some(kind) = args.risk_kind {
        config.cycle.risk_kind = kind.into();
    }
    let (universe, entries) = load_universe(&args.manifest).map_err(CliError::io)?;
    let inputs = entries.iter().map(|e| hash(&e.path)).collect::<CliResult<Vec<InputFile>>>()?;
    let mut report = run_backtest(&universe, &config, args.jobs).map_err(backtest_error)?;
    report.run = Some(RunManifest {
        config: config_file,
        manifest: hash(&args.manifest)?,
        inputs,
        output_dir: args.out.display().to_string(),
        master_seed: config.cycle.master_seed,
        tool_version: TOOL_VERSION.into(),
    });
    write_bundle(&args.out, &report).map_err(CliError::io)?;
    let summary = BacktestSummary {
        schema_version: SCHEMA_VERSION,
        output_dir: args.out.display().to_string(),
        files: BUNDLE_FILES.iter().map(|f| f.to_string()).collect(),
        cycles: report.cycles.len(),
        failed_cycles: report.cycles.iter().filter(|c| c.market.is_none()).count(),
        fit: report.fit,
    };
    emit(&summary, None)
}
