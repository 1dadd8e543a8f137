//! Risk–return profile aggregation and its linear fit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::cycles::CycleRun;
use crate::stats::mean;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("no bin has members in any successful cycle below the cutoff")]
    AllBinsEmpty,
    #[error("no successful cycles")]
    NoCycles,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinearFitError {
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("all risk values are equal")]
    DegenerateX,
    #[error("all returns are equal; goodness of fit is undefined")]
    DegenerateY,
    #[error("s and e differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub bin: usize,
    /// Bin center.
    pub s: f64,
    /// Mean over cycles of the bin's excess return.
    pub e_rel: f64,
    /// Cycles in which the bin had members.
    pub n_cycles: usize,
    pub mean_members: f64,
}

/// Average each bin's excess return over the cycles in which it is
/// populated, dropping bins whose center exceeds `risk_cutoff`.
pub fn aggregate_profile(run: &CycleRun, risk_cutoff: Option<f64>) -> Result<Vec<ProfilePoint>, ProfileError> {
    let ok_cycles: Vec<_> = run.cycles.iter().filter(|c| c.market.is_some()).collect();
    if ok_cycles.is_empty() {
        return Err(ProfileError::NoCycles);
    }
    let centers = run.bins.centers();
    let points: Vec<ProfilePoint> = centers
        .iter()
        .enumerate()
        .filter(|(_, &s)| risk_cutoff.is_none_or(|cut| s <= cut))
        .filter_map(|(bin, &s)| {
            let excess: Vec<f64> = ok_cycles.iter().filter_map(|c| c.bin_excess[bin]).collect();
            if excess.is_empty() {
                return None;
            }
            let members: Vec<f64> = ok_cycles
                .iter()
                .filter(|c| c.bin_excess[bin].is_some())
                .map(|c| c.bin_counts[bin] as f64)
                .collect();
            Some(ProfilePoint {
                bin,
                s,
                e_rel: mean(&excess),
                n_cycles: excess.len(),
                mean_members: mean(&members),
            })
        })
        .collect();
    if points.is_empty() {
        return Err(ProfileError::AllBinsEmpty);
    }
    Ok(points)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub p0: f64,
    pub p1: f64,
    /// `1 - Σ(e - p0 - p1 s)² / Σ(e - ē)²`.
    pub chi2: f64,
}

impl LinearFit {
    pub fn at(&self, s: f64) -> f64 {
        self.p0 + self.p1 * s
    }
}

/// Least-squares line through `(s, e)` and its goodness of fit.
pub fn linear_fit_chi2(s: &[f64], e: &[f64]) -> Result<LinearFit, LinearFitError> {
    if s.len() != e.len() {
        return Err(LinearFitError::LengthMismatch(s.len(), e.len()));
    }
    if s.len() < 3 {
        return Err(LinearFitError::TooFewPoints(s.len()));
    }
    let (s_bar, e_bar) = (mean(s), mean(e));
    let sxx: f64 = s.iter().map(|x| (x - s_bar) * (x - s_bar)).sum();
    let syy: f64 = e.iter().map(|y| (y - e_bar) * (y - e_bar)).sum();
    if !(sxx > 0.0) {
        return Err(LinearFitError::DegenerateX);
    }
    if !(syy > 0.0) {
        return Err(LinearFitError::DegenerateY);
    }
    let sxy: f64 = s.iter().zip(e).map(|(x, y)| (x - s_bar) * (y - e_bar)).sum();
    let p1 = sxy / sxx;
    let p0 = e_bar - p1 * s_bar;
    let rss: f64 = s.iter().zip(e).map(|(x, y)| (y - p0 - p1 * x).powi(2)).sum();
    Ok(LinearFit {
        p0,
        p1,
        chi2: 1.0 - rss / syy,
    })
}
