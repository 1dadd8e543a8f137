use std::fs;

use atre_core::simulate::{write_universe, SimulationSpec};

use crate::error::{CliError, CliResult};
use crate::output::{emit, hash, SimulateSummary, OUTPUT_SCHEMA_VERSION};
use crate::SimulateArgs;

pub fn run(args: &SimulateArgs) -> CliResult<()> {
    let text = fs::read_to_string(&args.spec).map_err(|e| CliError::io(format!("{}: {e}", args.spec.display())))?;
    let mut spec = SimulationSpec::from_toml(&text).map_err(|e| CliError::io(format!("{}: {e}", args.spec.display())))?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let universe = spec.generate().map_err(CliError::io)?;
    write_universe(&args.out, &universe).map_err(CliError::io)?;
    let series = std::iter::once(&universe.market)
        .chain(&universe.tickers)
        .map(|s| hash(&args.out.join(format!("{}.csv", s.ticker))))
        .collect::<CliResult<Vec<_>>>()?;
    let summary = SimulateSummary {
        schema_version: OUTPUT_SCHEMA_VERSION,
        seed: spec.seed,
        days: spec.days,
        manifest: args.out.join("manifest.csv").display().to_string(),
        series,
    };
    emit(&summary, None)
}
