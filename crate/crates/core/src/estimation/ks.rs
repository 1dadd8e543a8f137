//! Kolmogorov–Smirnov goodness of fit with a parametric-bootstrap critical
//! distance, since the model parameters are estimated from the sample.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit_branches, standardize, EstimationError, FitOptions, StandardizedSample};
use crate::distributions::AsymmetricDist;
use crate::seed::derive_seed;
use crate::stats::quantile_sorted;

pub const MIN_REPLICATES: usize = 50;
const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub d_max: f64,
    pub d_crit: f64,
    pub passed: bool,
    pub n_synthetic: usize,
    /// Replicates whose refit failed and were left out of `d_crit`.
    pub failed_replicates: usize,
}

/// `sup |F_n - F|` with the right-continuous empirical CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(values: &[f64], cdf: F) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
        .clamp(0.0, 1.0)
}

fn replicate_distance(dist: &AsymmetricDist, n: usize, seed: u64) -> Result<f64, EstimationError> {
    let draws = dist.sample(n, seed);
    let sample = standardize(&draws)?;
    let (refit, _) = fit_branches(sample.values(), &FitOptions::mle_only())?;
    Ok(ks_statistic(sample.values(), |x| refit.cdf(x)))
}

/// Compare `sample` with `dist`; the critical distance is the 95th
/// percentile of the statistic over `n_synthetic` same-size samples drawn
/// from `dist`, each standardized and refitted.
pub fn ks_test(
    sample: &StandardizedSample,
    dist: &AsymmetricDist,
    n_synthetic: usize,
    seed: u64,
) -> Result<KsResult, EstimationError> {
    if n_synthetic < MIN_REPLICATES {
        return Err(EstimationError::InsufficientData {
            what: "ks replicates",
            needed: MIN_REPLICATES,
            got: n_synthetic,
        });
    }
    let d_max = ks_statistic(sample.values(), |x| dist.cdf(x));
    let outcomes: Vec<Result<f64, EstimationError>> = (0..n_synthetic as u64)
        .into_par_iter()
        .map(|i| replicate_distance(dist, sample.len(), derive_seed(seed, "ks-replicate", i)))
        .collect();
    let mut distances: Vec<f64> = outcomes.iter().filter_map(|r| r.as_ref().ok().copied()).collect();
    let failed_replicates = n_synthetic - distances.len();
    if distances.len() < MIN_REPLICATES {
        // Surface the first failure; the null cannot be calibrated.
        return Err(outcomes.into_iter().find_map(Result::err).expect("some replicate failed"));
    }
    distances.sort_by(f64::total_cmp);
    let d_crit = quantile_sorted(&distances, 1.0 - ALPHA);
    Ok(KsResult {
        d_max,
        d_crit,
        passed: d_max < d_crit,
        n_synthetic,
        failed_replicates,
    })
}
