use std::fs::File;

use atre_core::backtest::load_prices;
use atre_core::backtest::prices::lagged_returns;
use atre_core::backtest::report::TOOL_VERSION;
use atre_core::distributions::Side;
use atre_core::estimation::{fit_asymmetric, fit_symmetric, fit_symmetric_fixed_q, ks_test, BranchFit, FitOptions, ParamSe};
use atre_core::seed::derive_seed;

use crate::error::{CliError, CliResult};
use crate::output::{emit, hash, read_json, BranchOut, FitReport, SymmetricOut, OUTPUT_SCHEMA_VERSION};
use crate::FitArgs;

fn branch_out(fit: &atre_core::estimation::AsymmetricFit, side: Side) -> BranchOut {
    let d = &fit.diagnostics;
    let (params, se, n, ll): (_, Option<ParamSe>, _, _) = match side {
        Side::Neg => (fit.dist.neg, d.se_neg, d.n_neg, d.log_likelihood_neg),
        Side::Pos => (fit.dist.pos, d.se_pos, d.n_pos, d.log_likelihood_pos),
    };
    BranchOut {
        q: params.q(),
        b: params.b(),
        se_q: se.map(|s| s.q),
        se_b: se.map(|s| s.b),
        n,
        log_likelihood: ll,
    }
}

fn symmetric(fit: BranchFit) -> SymmetricOut {
    SymmetricOut {
        q: fit.params.q(),
        b: fit.params.b(),
    }
}

pub fn run(args: &FitArgs) -> CliResult<()> {
    let path = &args.prices;
    let file = File::open(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    let ticker = args
        .ticker
        .clone()
        .or_else(|| path.file_stem().map(|s| s.to_string_lossy().into_owned()))
        .unwrap_or_default();
    let series = load_prices(&ticker, file).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    let window = args.window.unwrap_or(series.len().saturating_sub(1));
    if window + 1 > series.len() {
        return Err(CliError::io(format!(
            "series too short: window {window} needs {} prices, {} has {}",
            window + 1,
            path.display(),
            series.len()
        )));
    }
    let from = series.len() - window - 1;
    let returns = lagged_returns(&series.adj_close[from..], args.lag).map_err(CliError::io)?;

    let options = FitOptions {
        bootstrap_resamples: args.bootstrap,
        seed: derive_seed(args.seed, "fit-bootstrap", 0),
    };
    let fit = fit_asymmetric(&returns, &options).map_err(CliError::fit)?;
    let values = fit.sample.values();
    let sym_q = fit_symmetric(values, &FitOptions::mle_only()).map_err(CliError::fit)?.params.q();
    let sym = symmetric(fit_symmetric_fixed_q(values, sym_q).map_err(CliError::fit)?);
    let at_reference = match &args.reference {
        Some(reference) => {
            let market: FitReport = read_json(reference)?;
            Some(symmetric(fit_symmetric_fixed_q(values, market.symmetric.q).map_err(CliError::fit)?))
        }
        None => None,
    };
    let ks = (args.ks_replicates > 0)
        .then(|| ks_test(&fit.sample, &fit.dist, args.ks_replicates, derive_seed(args.seed, "fit-ks", 0)))
        .transpose()
        .map_err(CliError::fit)?;

    let report = FitReport {
        schema_version: OUTPUT_SCHEMA_VERSION,
        tool_version: TOOL_VERSION.into(),
        input: hash(path)?,
        ticker,
        lag: args.lag,
        window,
        start_date: series.dates[from],
        end_date: *series.dates.last().expect("non-empty series"),
        seed: args.seed,
        raw_mean: fit.sample.raw_mean(),
        raw_std: fit.sample.raw_std(),
        neg: branch_out(&fit, Side::Neg),
        pos: branch_out(&fit, Side::Pos),
        branch_imbalance: fit.diagnostics.branch_imbalance,
        symmetric: sym,
        symmetric_at_reference: at_reference,
        ks,
        returns,
    };
    emit(&report, args.out.as_deref())
}
