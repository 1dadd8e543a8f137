//! Maximum-likelihood fitting of asymmetric q-Gaussians to return samples.
//!
//! Each branch is fitted independently on the magnitudes of its own side of
//! zero. The half-branch log-likelihood of magnitudes `x_i` is
//! `n ln 2 - n ln Z - φ Σ ln(1 + κ x_i²)`; it is maximized over
//! `(q, ln b)` by a coarse grid followed by Nelder–Mead.

mod ks;
mod optimize;

pub use ks::{ks_statistic, ks_test, KsResult, MIN_REPLICATES};
pub use optimize::{Minimum, NelderMead, NotConverged};

use std::f64::consts::LN_2;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distributions::{AsymmetricDist, QGaussianParams, Side};
use crate::seed::{derive_seed, rng_from_seed};
use crate::stats::{mean, sample_std};

pub const Q_MIN: f64 = 1.01;
pub const Q_MAX: f64 = 2.95;
pub const B_MIN: f64 = 1e-4;
pub const B_MAX: f64 = 1e4;

pub const MIN_STANDARDIZE: usize = 50;
pub const MIN_BRANCH: usize = 30;
pub const MIN_ASYMMETRIC: usize = 100;
/// `min(n₋, n₊) / max(n₋, n₊)` below this flags a branch imbalance.
pub const IMBALANCE_RATIO: f64 = 0.2;
pub const DEFAULT_BOOTSTRAP: usize = 50;

const GRID_Q: [f64; 9] = [1.1, 1.3, 1.5, 1.7, 1.9, 2.1, 2.3, 2.5, 2.7];
/// `b = 10^(k/2)` for `k` in this range.
const GRID_B_HALF_DECADES: std::ops::RangeInclusive<i32> = -6..=6;
const STEP_Q: f64 = 0.1;
const STEP_LN_B: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimationError {
    #[error("{what}: need at least {needed} samples, got {got}")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        got: usize,
    },
    #[error("series has zero variance")]
    DegenerateSeries,
    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("{branch} branch fit did not converge in {iterations} iterations")]
    FitDidNotConverge { branch: &'static str, iterations: usize },
}

/// Zero-mean, unit-sample-std values together with the raw moments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StandardizedSample {
    values: Vec<f64>,
    raw_mean: f64,
    raw_std: f64,
}

impl StandardizedSample {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn raw_mean(&self) -> f64 {
        self.raw_mean
    }

    pub fn raw_std(&self) -> f64 {
        self.raw_std
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Map a standardized value back to raw units.
    pub fn unstandardize(&self, value: f64) -> f64 {
        self.raw_mean + self.raw_std * value
    }
}

fn check_finite(values: &[f64]) -> Result<(), EstimationError> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(EstimationError::NonFinite {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

/// `(r - mean) / std` with the sample (`n - 1`) standard deviation.
pub fn standardize(returns: &[f64]) -> Result<StandardizedSample, EstimationError> {
    if returns.len() < MIN_STANDARDIZE {
        return Err(EstimationError::InsufficientData {
            what: "standardize",
            needed: MIN_STANDARDIZE,
            got: returns.len(),
        });
    }
    check_finite(returns)?;
    let raw_mean = mean(returns);
    let raw_std = sample_std(returns);
    if !(raw_std > 0.0) || raw_std <= f64::EPSILON * raw_mean.abs() {
        return Err(EstimationError::DegenerateSeries);
    }
    let values = returns.iter().map(|r| (r - raw_mean) / raw_std).collect();
    Ok(StandardizedSample {
        values,
        raw_mean,
        raw_std,
    })
}

/// Magnitudes of the values belonging to `side` (zeros belong to `Neg`).
pub fn branch_magnitudes(values: &[f64], side: Side) -> Vec<f64> {
    values
        .iter()
        .filter(|&&v| Side::of(v) == side)
        .map(|v| v.abs())
        .collect()
}

/// Half-branch log-likelihood of magnitudes under `params`.
pub fn half_log_likelihood(magnitudes: &[f64], params: &QGaussianParams) -> f64 {
    Likelihood::new(magnitudes).log_likelihood(params.q(), params.b())
}

struct Likelihood {
    squares: Vec<f64>,
}

impl Likelihood {
    fn new(magnitudes: &[f64]) -> Self {
        Self {
            squares: magnitudes.iter().map(|x| x * x).collect(),
        }
    }

    fn log_likelihood(&self, q: f64, b: f64) -> f64 {
        let Ok(params) = QGaussianParams::new(q, b) else {
            return f64::NEG_INFINITY;
        };
        let kappa = params.kappa();
        let n = self.squares.len() as f64;
        let shape: f64 = self.squares.iter().map(|s| (kappa * s).ln_1p()).sum();
        n * (LN_2 - params.ln_normalization()) - params.phi() * shape
    }

    /// Negative log-likelihood in `(q, ln b)`, infinite outside the box.
    fn objective(&self, x: &[f64]) -> f64 {
        let (q, ln_b) = (x[0], x[1]);
        if !(Q_MIN..=Q_MAX).contains(&q) || !(B_MIN.ln()..=B_MAX.ln()).contains(&ln_b) {
            return f64::INFINITY;
        }
        -self.log_likelihood(q, ln_b.exp())
    }

    fn grid_start(&self) -> [f64; 2] {
        let mut best = (f64::INFINITY, [GRID_Q[0], 0.0]);
        for &q in &GRID_Q {
            for k in GRID_B_HALF_DECADES {
                let x = [q, f64::from(k) * 0.5 * std::f64::consts::LN_10];
                let v = self.objective(&x);
                if v < best.0 {
                    best = (v, x);
                }
            }
        }
        best.1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Mle {
    params: QGaussianParams,
    log_likelihood: f64,
    iterations: usize,
}

fn mle(magnitudes: &[f64], start: Option<[f64; 2]>, branch: &'static str) -> Result<Mle, EstimationError> {
    let likelihood = Likelihood::new(magnitudes);
    let start = start.unwrap_or_else(|| likelihood.grid_start());
    let found = NelderMead::default()
        .minimize(|x| likelihood.objective(x), &start, &[STEP_Q, STEP_LN_B])
        .map_err(|e| EstimationError::FitDidNotConverge {
            branch,
            iterations: e.best.iterations,
        })?;
    let params = QGaussianParams::new(found.x[0], found.x[1].exp()).expect("optimizer stays inside the box");
    Ok(Mle {
        params,
        log_likelihood: -found.value,
        iterations: found.iterations,
    })
}

/// Controls the optional bootstrap standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Nonparametric resamples per branch; 0 skips standard errors.
    pub bootstrap_resamples: usize,
    pub seed: u64,
}

impl FitOptions {
    pub fn mle_only() -> Self {
        Self {
            bootstrap_resamples: 0,
            seed: 0,
        }
    }

    pub fn with_bootstrap(seed: u64) -> Self {
        Self {
            bootstrap_resamples: DEFAULT_BOOTSTRAP,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSe {
    pub q: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchFit {
    pub params: QGaussianParams,
    pub se: Option<ParamSe>,
    pub n: usize,
    pub log_likelihood: f64,
    pub iterations: usize,
}

fn bootstrap_se(magnitudes: &[f64], estimate: &Mle, resamples: usize, seed: u64, branch: &'static str) -> Option<ParamSe> {
    if resamples < 2 {
        return None;
    }
    let mut rng = rng_from_seed(derive_seed(seed, "bootstrap", if branch == "pos" { 1 } else { 0 }));
    let start = [estimate.params.q(), estimate.params.b().ln()];
    let mut qs = Vec::with_capacity(resamples);
    let mut bs = Vec::with_capacity(resamples);
    let mut draw = vec![0.0; magnitudes.len()];
    for _ in 0..resamples {
        for slot in draw.iter_mut() {
            *slot = magnitudes[rng.random_range(0..magnitudes.len())];
        }
        // A resample that fails to converge contributes nothing.
        if let Ok(fit) = mle(&draw, Some(start), branch) {
            qs.push(fit.params.q());
            bs.push(fit.params.b());
        }
    }
    (qs.len() >= 2).then(|| ParamSe {
        q: sample_std(&qs),
        b: sample_std(&bs),
    })
}

fn fit_magnitudes(magnitudes: &[f64], branch: &'static str, options: &FitOptions) -> Result<BranchFit, EstimationError> {
    if magnitudes.len() < MIN_BRANCH {
        return Err(EstimationError::InsufficientData {
            what: branch,
            needed: MIN_BRANCH,
            got: magnitudes.len(),
        });
    }
    check_finite(magnitudes)?;
    let estimate = mle(magnitudes, None, branch)?;
    let se = bootstrap_se(magnitudes, &estimate, options.bootstrap_resamples, options.seed, branch);
    Ok(BranchFit {
        params: estimate.params,
        se,
        n: magnitudes.len(),
        log_likelihood: estimate.log_likelihood,
        iterations: estimate.iterations,
    })
}

/// Fit one branch of values split at zero. The values are used as given.
pub fn fit_branch_values(values: &[f64], side: Side, options: &FitOptions) -> Result<BranchFit, EstimationError> {
    fit_magnitudes(&branch_magnitudes(values, side), side.name(), options)
}

/// Fit one branch of a standardized sample.
pub fn fit_branch(sample: &StandardizedSample, side: Side, options: &FitOptions) -> Result<BranchFit, EstimationError> {
    fit_branch_values(sample.values(), side, options)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitDiagnostics {
    pub n_neg: usize,
    pub n_pos: usize,
    pub se_neg: Option<ParamSe>,
    pub se_pos: Option<ParamSe>,
    pub log_likelihood_neg: f64,
    pub log_likelihood_pos: f64,
    pub branch_imbalance: bool,
}

/// Fit both branches of `values`, split at zero, without standardizing.
pub fn fit_branches(values: &[f64], options: &FitOptions) -> Result<(AsymmetricDist, FitDiagnostics), EstimationError> {
    let neg = fit_branch_values(values, Side::Neg, options)?;
    let pos = fit_branch_values(values, Side::Pos, options)?;
    let ratio = neg.n.min(pos.n) as f64 / neg.n.max(pos.n) as f64;
    let branch_imbalance = ratio < IMBALANCE_RATIO;
    if branch_imbalance {
        log::warn!("branch imbalance: {} negative vs {} positive samples", neg.n, pos.n);
    }
    let dist = AsymmetricDist::new(neg.params, pos.params, 0.0).expect("zero offset");
    Ok((
        dist,
        FitDiagnostics {
            n_neg: neg.n,
            n_pos: pos.n,
            se_neg: neg.se,
            se_pos: pos.se,
            log_likelihood_neg: neg.log_likelihood,
            log_likelihood_pos: pos.log_likelihood,
            branch_imbalance,
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymmetricFit {
    pub dist: AsymmetricDist,
    pub diagnostics: FitDiagnostics,
    pub sample: StandardizedSample,
}

/// Standardize raw returns and fit both branches in standardized space.
pub fn fit_asymmetric(returns: &[f64], options: &FitOptions) -> Result<AsymmetricFit, EstimationError> {
    if returns.len() < MIN_ASYMMETRIC {
        return Err(EstimationError::InsufficientData {
            what: "fit_asymmetric",
            needed: MIN_ASYMMETRIC,
            got: returns.len(),
        });
    }
    let sample = standardize(returns)?;
    let (dist, diagnostics) = fit_branches(sample.values(), options)?;
    Ok(AsymmetricFit {
        dist,
        diagnostics,
        sample,
    })
}

/// Symmetric q-Gaussian fitted to all values through their magnitudes.
pub fn fit_symmetric(values: &[f64], options: &FitOptions) -> Result<BranchFit, EstimationError> {
    let magnitudes: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    fit_magnitudes(&magnitudes, "symmetric", options)
}

/// Symmetric fit of `b` alone with `q` held fixed.
pub fn fit_symmetric_fixed_q(values: &[f64], q: f64) -> Result<BranchFit, EstimationError> {
    if values.len() < MIN_BRANCH {
        return Err(EstimationError::InsufficientData {
            what: "symmetric",
            needed: MIN_BRANCH,
            got: values.len(),
        });
    }
    check_finite(values)?;
    let magnitudes: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let likelihood = Likelihood::new(&magnitudes);
    let objective = |x: &[f64]| likelihood.objective(&[q, x[0]]);
    let start = GRID_B_HALF_DECADES
        .map(|k| f64::from(k) * 0.5 * std::f64::consts::LN_10)
        .min_by(|a, b| objective(&[*a]).total_cmp(&objective(&[*b])))
        .expect("non-empty grid");
    let found = NelderMead::default()
        .minimize(objective, &[start], &[STEP_LN_B])
        .map_err(|e| EstimationError::FitDidNotConverge {
            branch: "symmetric",
            iterations: e.best.iterations,
        })?;
    let params = QGaussianParams::new(q, found.x[0].exp()).map_err(|_| EstimationError::FitDidNotConverge {
        branch: "symmetric",
        iterations: found.iterations,
    })?;
    if !found.value.is_finite() {
        return Err(EstimationError::FitDidNotConverge {
            branch: "symmetric",
            iterations: found.iterations,
        });
    }
    Ok(BranchFit {
        params,
        se: None,
        n: magnitudes.len(),
        log_likelihood: -found.value,
        iterations: found.iterations,
    })
}
