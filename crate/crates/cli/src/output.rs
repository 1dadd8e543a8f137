//! JSON documents printed by the commands. Each has a schema under
//! `crates/cli/schemas/`.

use std::fs;
use std::io::Write;
use std::path::Path;

use atre_core::backtest::report::InputFile;
use atre_core::backtest::LinearFit;
use atre_core::entropy::RiskKind;
use atre_core::estimation::KsResult;
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Version of the fit, risk and simulate documents.
pub const OUTPUT_SCHEMA_VERSION: u32 = 1;

/// Branch parameters as plain numbers; range checks happen where they are used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchOut {
    pub q: f64,
    pub b: f64,
    pub se_q: Option<f64>,
    pub se_b: Option<f64>,
    pub n: usize,
    pub log_likelihood: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricOut {
    pub q: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub input: InputFile,
    pub ticker: String,
    pub lag: usize,
    pub window: usize,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub seed: u64,
    pub raw_mean: f64,
    pub raw_std: f64,
    pub neg: BranchOut,
    pub pos: BranchOut,
    pub branch_imbalance: bool,
    /// Symmetric fit; `b` is refitted at the fitted `q`.
    pub symmetric: SymmetricOut,
    /// Symmetric `b` at the reference fit's `q`, when `--reference` is given.
    pub symmetric_at_reference: Option<SymmetricOut>,
    pub ks: Option<KsResult>,
    /// Raw lagged returns of the window, oldest first.
    pub returns: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskRecord {
    pub schema_version: u32,
    pub kind: RiskKind,
    pub value: f64,
    pub market: InputFile,
    pub equity: InputFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateSummary {
    pub schema_version: u32,
    pub seed: u64,
    pub days: usize,
    pub manifest: String,
    pub series: Vec<InputFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestSummary {
    pub schema_version: u32,
    pub output_dir: String,
    pub files: Vec<String>,
    pub cycles: usize,
    pub failed_cycles: usize,
    pub fit: Option<LinearFit>,
}

pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value).map_err(CliError::io)
}

/// Print `value` as JSON, or write it to `out`.
pub fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> CliResult<()> {
    let text = to_json(value)?;
    match out {
        Some(path) => fs::write(path, text + "\n").map_err(|e| CliError::io(format!("{}: {e}", path.display()))),
        None => print_stdout(&text),
    }
}

/// Write one line to standard output; a closed pipe is not an error.
pub fn print_stdout(line: &str) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{line}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::io(e)),
        _ => Ok(()),
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

pub fn hash(path: &Path) -> CliResult<InputFile> {
    InputFile::hash(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}
