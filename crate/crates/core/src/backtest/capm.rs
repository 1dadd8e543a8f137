//! CAPM beta, the classical baseline risk measure.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::prices::ReturnSeries;
use crate::stats::mean;

pub const MIN_OVERLAP: usize = 30;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CapmError {
    #[error("need at least {needed} overlapping returns, got {got}")]
    InsufficientOverlap { needed: usize, got: usize },
    #[error("market returns have zero variance")]
    ZeroMarketVariance,
}

/// Regression of equity on market returns: `r_j = alpha + beta r_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapmFit {
    pub alpha: f64,
    pub beta: f64,
}

/// `beta = cov(r_j, r_m) / var(r_m)`, which equals `ρ σ_j / σ_m`.
pub fn capm_fit(equity: &[f64], market: &[f64]) -> Result<CapmFit, CapmError> {
    assert_eq!(equity.len(), market.len(), "returns must be aligned");
    if equity.len() < MIN_OVERLAP {
        return Err(CapmError::InsufficientOverlap {
            needed: MIN_OVERLAP,
            got: equity.len(),
        });
    }
    let (mean_e, mean_m) = (mean(equity), mean(market));
    let (mut cov, mut var_m) = (0.0, 0.0);
    for (e, m) in equity.iter().zip(market) {
        cov += (e - mean_e) * (m - mean_m);
        var_m += (m - mean_m) * (m - mean_m);
    }
    if !(var_m > 0.0) {
        return Err(CapmError::ZeroMarketVariance);
    }
    let beta = cov / var_m;
    Ok(CapmFit {
        alpha: mean_e - beta * mean_m,
        beta,
    })
}

pub fn capm_beta(equity: &[f64], market: &[f64]) -> Result<f64, CapmError> {
    capm_fit(equity, market).map(|f| f.beta)
}

/// Beta over the dates the two series share.
pub fn capm_beta_series(equity: &ReturnSeries, market: &ReturnSeries) -> Result<f64, CapmError> {
    let (mut e, mut m) = (Vec::new(), Vec::new());
    let (mut i, mut j) = (0, 0);
    while i < equity.dates.len() && j < market.dates.len() {
        match equity.dates[i].cmp(&market.dates[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                e.push(equity.returns[i]);
                m.push(market.returns[j]);
                i += 1;
                j += 1;
            }
        }
    }
    capm_beta(&e, &m)
}
