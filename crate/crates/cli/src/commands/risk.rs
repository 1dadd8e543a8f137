use atre_core::backtest::capm::capm_beta;
use atre_core::distributions::QGaussianParams;
use atre_core::entropy::{branch_entropy_of, tre_symmetric, RiskKind};

use crate::error::{CliError, CliResult};
use crate::output::{hash, print_stdout, read_json, BranchOut, FitReport, RiskRecord, OUTPUT_SCHEMA_VERSION};
use crate::RiskArgs;

fn params(branch: &BranchOut, which: &str) -> CliResult<QGaussianParams> {
    QGaussianParams::new(branch.q, branch.b).map_err(|e| CliError::domain(format!("domain error in {which}: {e}")))
}

fn branch_risk(market: &BranchOut, equity: &BranchOut, side: &str) -> CliResult<f64> {
    let reference = params(market, &format!("market {side} branch"))?;
    let eq = params(equity, &format!("equity {side} branch"))?;
    branch_entropy_of(&reference, &eq).map_err(|e| CliError::domain(format!("{side} branch: {e}")))
}

/// Equity temperature at the market's symmetric `q`.
fn b_at_market_q(market: &FitReport, equity: &FitReport) -> CliResult<f64> {
    let q = market.symmetric.q;
    [equity.symmetric_at_reference, Some(equity.symmetric)]
        .into_iter()
        .flatten()
        .find(|s| s.q == q)
        .map(|s| s.b)
        .ok_or_else(|| CliError::io("equity fit has no symmetric fit at the market's q; refit it with --reference"))
}

pub fn compute(kind: RiskKind, market: &FitReport, equity: &FitReport) -> CliResult<f64> {
    match kind {
        RiskKind::SMinus => branch_risk(&market.neg, &equity.neg, "negative"),
        RiskKind::SPlus => branch_risk(&market.pos, &equity.pos, "positive"),
        RiskKind::Atre => Ok(branch_risk(&market.neg, &equity.neg, "negative")? + branch_risk(&market.pos, &equity.pos, "positive")?),
        RiskKind::TreSym => {
            let b_eq = b_at_market_q(market, equity)?;
            tre_symmetric(market.symmetric.q, market.symmetric.b, b_eq).map_err(CliError::domain)
        }
        RiskKind::CapmBeta => {
            if (market.end_date, market.lag, market.window) != (equity.end_date, equity.lag, equity.window) {
                return Err(CliError::io("beta needs both fits over the same window, lag and end date"));
            }
            capm_beta(&equity.returns, &market.returns).map_err(CliError::fit)
        }
    }
}

pub fn run(args: &RiskArgs) -> CliResult<()> {
    let market: FitReport = read_json(&args.market)?;
    let equity: FitReport = read_json(&args.equity)?;
    let kind = RiskKind::from(args.risk_kind);
    let value = compute(kind, &market, &equity)?;
    let record = RiskRecord {
        schema_version: OUTPUT_SCHEMA_VERSION,
        kind,
        value,
        market: hash(&args.market)?,
        equity: hash(&args.equity)?,
    };
    print_stdout(&value.to_string())?;
    print_stdout(&serde_json::to_string(&record).map_err(CliError::io)?)
}
