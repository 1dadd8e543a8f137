//! q-Gaussian branches and the asymmetric composite distribution.
//!
//! A branch with parameters `(q, b)` has the unnormalized shape
//! `[1 + κΩ²]^(-φ)` where `φ = 1/(q-1)` and `κ = (q-1) b`. The composite
//! distribution places a half branch on each side of `mean_offset`, each
//! carrying probability 1/2.

use rand::Rng;
use rand_distr::{Distribution, StudentT};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed::rng_from_seed;
use crate::specfun::{beta_inc_reg, ln_c_q, DomainError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error("q must satisfy 1 < q < 3, got {0}")]
    BadQ(f64),
    #[error("b must be positive and finite, got {0}")]
    BadB(f64),
    #[error("mean offset must be finite, got {0}")]
    BadOffset(f64),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct QGaussianParams {
    q: f64,
    b: f64,
}

#[derive(Deserialize)]
struct RawParams {
    q: f64,
    b: f64,
}

impl TryFrom<RawParams> for QGaussianParams {
    type Error = DistributionError;
    fn try_from(raw: RawParams) -> Result<Self, Self::Error> {
        QGaussianParams::new(raw.q, raw.b)
    }
}

impl QGaussianParams {
    pub fn new(q: f64, b: f64) -> Result<Self, DistributionError> {
        if !(q.is_finite() && q > 1.0 && q < 3.0) {
            return Err(DistributionError::BadQ(q));
        }
        if !(b.is_finite() && b > 0.0) {
            return Err(DistributionError::BadB(b));
        }
        Ok(Self { q, b })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `φ = 1/(q-1)`, the (negated) power of the bracket.
    pub fn phi(&self) -> f64 {
        1.0 / (self.q - 1.0)
    }

    /// `κ = (q-1) b`, the bracket's quadratic coefficient.
    pub fn kappa(&self) -> f64 {
        (self.q - 1.0) * self.b
    }

    /// Student-t degrees of freedom of the equivalent scaled t law.
    pub fn student_dof(&self) -> f64 {
        (3.0 - self.q) / (self.q - 1.0)
    }

    /// `ln Z` with `Z = C_q / √b`.
    pub fn ln_normalization(&self) -> f64 {
        // Validated params keep c_q inside its domain.
        ln_c_q(self.q).expect("validated q") - 0.5 * self.b.ln()
    }

    pub fn normalization(&self) -> f64 {
        self.ln_normalization().exp()
    }

    /// Density of the half branch at distance `x >= 0` from the center,
    /// `(1/Z)[1 + κx²]^(-φ)`.
    pub fn half_density(&self, x: f64) -> f64 {
        self.ln_half_density(x).exp()
    }

    pub fn ln_half_density(&self, x: f64) -> f64 {
        -self.phi() * (self.kappa() * x * x).ln_1p() - self.ln_normalization()
    }

    /// Probability mass of the half branch on `[0, t]`,
    /// `½ I_y(½, φ-½)` with `y = κt²/(1+κt²)`.
    pub fn half_mass(&self, t: f64) -> f64 {
        let t = t.abs();
        if t == f64::INFINITY {
            return 0.5;
        }
        let z = self.kappa() * t * t;
        let y = z / (1.0 + z);
        let one_minus_y = 1.0 / (1.0 + z);
        0.5 * beta_inc_reg(0.5, self.phi() - 0.5, y, one_minus_y).expect("validated params")
    }

    /// Draw `|Ω|` for one half branch via the Student-t equivalence:
    /// `Ω = T / √(νκ)` with `T ~ t(ν)`, `ν = (3-q)/(q-1)`.
    pub fn sample_magnitude<R: Rng + ?Sized>(&self, student: &StudentT<f64>, rng: &mut R) -> f64 {
        let t: f64 = student.sample(rng);
        t.abs() / (self.student_dof() * self.kappa()).sqrt()
    }

    /// `E|Ω|` under the branch shape; finite only for `q < 2`.
    pub fn abs_mean(&self) -> Option<f64> {
        if self.q >= 2.0 {
            return None;
        }
        let nu = self.student_dof();
        let ln_ratio = crate::specfun::log_gamma(0.5 * (nu + 1.0)).ok()? - crate::specfun::log_gamma(0.5 * nu).ok()?;
        Some(2.0 * ln_ratio.exp() / ((std::f64::consts::PI * self.kappa()).sqrt() * (nu - 1.0)))
    }

    pub(crate) fn student(&self) -> StudentT<f64> {
        StudentT::new(self.student_dof()).expect("validated q gives positive dof")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Neg,
    Pos,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Neg => "neg",
            Side::Pos => "pos",
        }
    }

    /// Side owning a centered value; exact zeros go to the negative branch.
    pub fn of(centered: f64) -> Side {
        if centered > 0.0 {
            Side::Pos
        } else {
            Side::Neg
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymmetricDist {
    pub neg: QGaussianParams,
    pub pos: QGaussianParams,
    #[serde(default)]
    pub mean_offset: f64,
}

impl AsymmetricDist {
    pub fn new(neg: QGaussianParams, pos: QGaussianParams, mean_offset: f64) -> Result<Self, DistributionError> {
        if !mean_offset.is_finite() {
            return Err(DistributionError::BadOffset(mean_offset));
        }
        Ok(Self { neg, pos, mean_offset })
    }

    pub fn symmetric(params: QGaussianParams) -> Self {
        Self {
            neg: params,
            pos: params,
            mean_offset: 0.0,
        }
    }

    pub fn branch(&self, side: Side) -> &QGaussianParams {
        match side {
            Side::Neg => &self.neg,
            Side::Pos => &self.pos,
        }
    }

    pub fn pdf(&self, omega: f64) -> f64 {
        let x = omega - self.mean_offset;
        self.branch(Side::of(x)).half_density(x)
    }

    pub fn cdf(&self, omega: f64) -> f64 {
        let x = omega - self.mean_offset;
        if x.is_nan() {
            return f64::NAN;
        }
        match Side::of(x) {
            Side::Neg => (0.5 - self.neg.half_mass(x)).max(0.0),
            Side::Pos => (0.5 + self.pos.half_mass(x)).min(1.0),
        }
    }

    /// Expected value; `None` when a branch has `q >= 2` (infinite mean).
    pub fn mean(&self) -> Option<f64> {
        Some(self.mean_offset + 0.5 * (self.pos.abs_mean()? - self.neg.abs_mean()?))
    }

    /// `n` i.i.d. draws, reproducible from `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rng_from_seed(seed);
        self.sample_with(n, &mut rng)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        let neg_t = self.neg.student();
        let pos_t = self.pos.student();
        (0..n)
            .map(|_| {
                if rng.random::<bool>() {
                    self.mean_offset - self.neg.sample_magnitude(&neg_t, rng)
                } else {
                    self.mean_offset + self.pos.sample_magnitude(&pos_t, rng)
                }
            })
            .collect()
    }
}
