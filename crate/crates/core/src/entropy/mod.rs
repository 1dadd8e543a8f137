//! Tsallis relative entropy between q-Gaussian models.
//!
//! The risk of an equity `P` relative to a reference `R` is computed branch
//! by branch in closed form; [`oracle`] integrates the same quantity
//! numerically and [`discrete`] holds the histogram-style estimators.

pub mod discrete;
pub mod oracle;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distributions::{AsymmetricDist, QGaussianParams, Side};
use crate::specfun::{log_beta, q_log};

pub use discrete::{kl_discrete, shannon_entropy_discrete, tre_discrete, tsallis_entropy_discrete, DiscreteError};
pub use oracle::{quadrature_oracle, OracleError};

/// Values in `(-CLAMP, 0)` are rounding noise and are reported as zero.
pub const NEGATIVE_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DomainCondition {
    /// `γ + φ' - 3/2 > 0`, needed for the second-moment integral to converge.
    SecondMomentConvergence,
    /// `1 < q < 3` for the symmetric formula.
    QRange,
    /// Temperatures must be positive and finite.
    PositiveTemperature,
}

impl fmt::Display for DomainCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainCondition::SecondMomentConvergence => f.write_str("gamma + phi' - 3/2 > 0"),
            DomainCondition::QRange => f.write_str("1 < q < 3"),
            DomainCondition::PositiveTemperature => f.write_str("b > 0"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EntropyError {
    #[error("domain error: {condition} violated ({detail})")]
    Domain { condition: DomainCondition, detail: String },
    #[error("{side} branch: {source}")]
    Branch {
        side: &'static str,
        #[source]
        source: Box<EntropyError>,
    },
}

impl EntropyError {
    /// The violated condition, looking through side annotations.
    pub fn condition(&self) -> DomainCondition {
        match self {
            EntropyError::Domain { condition, .. } => *condition,
            EntropyError::Branch { source, .. } => source.condition(),
        }
    }
}

/// Reference/equity branch pair with the derived `γ = φ'/φ`, `η = √(κ/κ')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchEntropyInputs {
    reference: QGaussianParams,
    equity: QGaussianParams,
}

impl BranchEntropyInputs {
    pub fn new(reference: QGaussianParams, equity: QGaussianParams) -> Result<Self, EntropyError> {
        let inputs = Self { reference, equity };
        let margin = inputs.gamma() + equity.phi() - 1.5;
        if !(margin > 0.0) {
            return Err(EntropyError::Domain {
                condition: DomainCondition::SecondMomentConvergence,
                detail: format!(
                    "q={}, q'={} give gamma + phi' - 3/2 = {margin}",
                    reference.q(),
                    equity.q()
                ),
            });
        }
        Ok(inputs)
    }

    pub fn reference(&self) -> &QGaussianParams {
        &self.reference
    }

    pub fn equity(&self) -> &QGaussianParams {
        &self.equity
    }

    pub fn gamma(&self) -> f64 {
        self.equity.phi() / self.reference.phi()
    }

    pub fn eta(&self) -> f64 {
        (self.reference.kappa() / self.equity.kappa()).sqrt()
    }

    /// `ln[B(γ, φ') / B(γ, φ' - 1/2)]`.
    pub(crate) fn ln_beta_ratio(&self) -> f64 {
        let gamma = self.gamma();
        let phi_eq = self.equity.phi();
        // Both arguments are positive once the inputs validate.
        log_beta(gamma, phi_eq).expect("validated") - log_beta(gamma, phi_eq - 0.5).expect("validated")
    }
}

/// Relative entropy of one equity branch against the reference branch,
/// `S = (φ/2)[(N - 1) + N η² / (2(γ + φ' - 3/2))]` with
/// `N = (Z/Z')^(1/φ) B(γ, φ')/B(γ, φ' - 1/2)`.
///
/// The exponent inside the entropy uses the reference branch's `q`.
pub fn branch_entropy(inputs: &BranchEntropyInputs) -> f64 {
    let reference = inputs.reference();
    let equity = inputs.equity();
    if reference == equity {
        return 0.0;
    }
    let phi = reference.phi();
    let ln_n = (reference.ln_normalization() - equity.ln_normalization()) / phi + inputs.ln_beta_ratio();
    let n = ln_n.exp();
    let eta = inputs.eta();
    let moment = 0.5 * eta * eta / (inputs.gamma() + equity.phi() - 1.5);
    let s = 0.5 * phi * (ln_n.exp_m1() + n * moment);
    clamp_noise(s)
}

pub fn branch_entropy_of(reference: &QGaussianParams, equity: &QGaussianParams) -> Result<f64, EntropyError> {
    Ok(branch_entropy(&BranchEntropyInputs::new(*reference, *equity)?))
}

fn clamp_noise(s: f64) -> f64 {
    if s < 0.0 && s > -NEGATIVE_CLAMP {
        0.0
    } else {
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atre {
    pub total: f64,
    pub s_minus: f64,
    pub s_plus: f64,
}

/// Asymmetric relative entropy of `equity` against `reference`: the
/// negative and positive branches are paired and summed.
pub fn atre(reference: &AsymmetricDist, equity: &AsymmetricDist) -> Result<Atre, EntropyError> {
    let side_entropy = |side: Side| {
        branch_entropy_of(reference.branch(side), equity.branch(side)).map_err(|e| EntropyError::Branch {
            side: side.name(),
            source: Box::new(e),
        })
    };
    let s_minus = side_entropy(Side::Neg)?;
    let s_plus = side_entropy(Side::Pos)?;
    Ok(Atre {
        total: s_minus + s_plus,
        s_minus,
        s_plus,
    })
}

/// Symmetric q-Gaussian relative entropy at a shared `q`:
/// `-ln_q(η) + ½ η^(1-q) (η² - 1)` with `η = √(b_ref / b_eq)`.
pub fn tre_symmetric(q: f64, b_ref: f64, b_eq: f64) -> Result<f64, EntropyError> {
    if !(q.is_finite() && q > 1.0 && q < 3.0) {
        return Err(EntropyError::Domain {
            condition: DomainCondition::QRange,
            detail: format!("q = {q}"),
        });
    }
    for b in [b_ref, b_eq] {
        if !(b.is_finite() && b > 0.0) {
            return Err(EntropyError::Domain {
                condition: DomainCondition::PositiveTemperature,
                detail: format!("b = {b}"),
            });
        }
    }
    let eta = (b_ref / b_eq).sqrt();
    let ln_q = q_log(eta, q).expect("eta is positive");
    Ok(clamp_noise(-ln_q + 0.5 * eta.powf(1.0 - q) * (eta * eta - 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RiskKind {
    #[serde(rename = "ATRE", alias = "atre")]
    Atre,
    #[serde(rename = "S_MINUS", alias = "s-minus")]
    SMinus,
    #[serde(rename = "S_PLUS", alias = "s-plus")]
    SPlus,
    #[serde(rename = "TRE_SYM", alias = "tre")]
    TreSym,
    #[serde(rename = "CAPM_BETA", alias = "beta")]
    CapmBeta,
}

impl RiskKind {
    pub const ALL: [RiskKind; 5] = [
        RiskKind::Atre,
        RiskKind::SMinus,
        RiskKind::SPlus,
        RiskKind::TreSym,
        RiskKind::CapmBeta,
    ];

    pub fn code(self) -> &'static str {
        match self {
            RiskKind::Atre => "ATRE",
            RiskKind::SMinus => "S_MINUS",
            RiskKind::SPlus => "S_PLUS",
            RiskKind::TreSym => "TRE_SYM",
            RiskKind::CapmBeta => "CAPM_BETA",
        }
    }

    /// Row label used in the earnings statistics table.
    pub fn label(self) -> &'static str {
        match self {
            RiskKind::Atre => "Asymmetric (S_- + S_+)",
            RiskKind::SMinus => "Asymmetric (S_-)",
            RiskKind::SPlus => "Asymmetric (S_+)",
            RiskKind::TreSym => "Symmetric",
            RiskKind::CapmBeta => "CAPM beta",
        }
    }

    pub fn is_entropy(self) -> bool {
        !matches!(self, RiskKind::CapmBeta)
    }
}

impl fmt::Display for RiskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskScore {
    pub kind: RiskKind,
    pub value: f64,
}
