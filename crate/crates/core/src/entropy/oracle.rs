//! Numerical route to the branch relative entropy.
//!
//! `S = φ {∫₀^∞ P (P/R)^(1/φ) dΩ - ½}` is integrated directly from the two
//! half densities on a finite window, with the power-law remainder beyond
//! the window summed in closed form. Used to validate [`super::branch_entropy`].

use thiserror::Error;

use crate::distributions::QGaussianParams;
use crate::quadrature::{geometric_breaks, integrate_pieces, power_law_tail, QuadratureError, Tolerance};
use crate::specfun::log_beta;

/// Window edge in units of `1/√κ'`.
const WINDOW: f64 = 50.0;

const TOL: Tolerance = Tolerance {
    abs: 1e-14,
    rel: 1e-14,
    max_intervals: 20_000,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("integral does not converge: {0}")]
    NonConvergent(#[from] QuadratureError),
}

struct Pair<'a> {
    reference: &'a QGaussianParams,
    equity: &'a QGaussianParams,
}

impl Pair<'_> {
    fn window(&self) -> f64 {
        WINDOW / self.equity.kappa().sqrt()
    }

    fn breaks(&self) -> Vec<f64> {
        let window = self.window();
        let scale = (1.0 / self.reference.b().sqrt()).min(1.0 / self.equity.b().sqrt());
        geometric_breaks(scale.min(window), window)
    }

    /// Power of `(1 + κ'Ω²)` in the integrand's denominator, `γ + φ'`.
    fn tail_power(&self) -> f64 {
        self.equity.phi() / self.reference.phi() + self.equity.phi()
    }
}

/// Numerical value of the branch entropy of `equity` against `reference`.
pub fn quadrature_oracle(reference: &QGaussianParams, equity: &QGaussianParams) -> Result<f64, OracleError> {
    let pair = Pair { reference, equity };
    let phi = reference.phi();
    let integrand = |x: f64| {
        let ln_p = equity.ln_half_density(x);
        let ln_r = reference.ln_half_density(x);
        (ln_p + (ln_p - ln_r) / phi).exp()
    };
    let body = integrate_pieces(integrand, &pair.breaks(), TOL)?.value;

    // Beyond the window the integrand is exactly
    // (Z/Z')^(1/φ) (1/Z') (1 + κΩ²)(1 + κ'Ω²)^-(γ+φ').
    let window = pair.window();
    let a = pair.tail_power();
    let kappa_eq = equity.kappa();
    let prefactor =
        ((reference.ln_normalization() - equity.ln_normalization()) / phi - equity.ln_normalization()).exp();
    let tail = prefactor
        * (power_law_tail(a, kappa_eq, window, 0)? + reference.kappa() * power_law_tail(a, kappa_eq, window, 1)?);

    Ok(phi * (body + tail - 0.5))
}

/// The two sub-integrals whose closed forms assemble the branch entropy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubIntegrals {
    /// `(1/Z') ∫₀^∞ (1 + κ'Ω²)^-(γ+φ') dΩ`
    pub zeroth: f64,
    /// `(1/Z') ∫₀^∞ κΩ² (1 + κ'Ω²)^-(γ+φ') dΩ`
    pub second: f64,
}

/// Sub-integrals evaluated by quadrature.
pub fn sub_integrals_quadrature(
    reference: &QGaussianParams,
    equity: &QGaussianParams,
) -> Result<SubIntegrals, OracleError> {
    let pair = Pair { reference, equity };
    let a = pair.tail_power();
    let kappa_eq = equity.kappa();
    let kappa_ref = reference.kappa();
    let inv_z = (-equity.ln_normalization()).exp();
    let breaks = pair.breaks();
    let window = pair.window();

    let zeroth_body = integrate_pieces(|x| (-a * (kappa_eq * x * x).ln_1p()).exp(), &breaks, TOL)?.value;
    let zeroth_tail = power_law_tail(a, kappa_eq, window, 0)?;
    let second_body = integrate_pieces(
        |x| kappa_ref * x * x * (-a * (kappa_eq * x * x).ln_1p()).exp(),
        &breaks,
        TOL,
    )?
    .value;
    let second_tail = kappa_ref * power_law_tail(a, kappa_eq, window, 1)?;

    Ok(SubIntegrals {
        zeroth: inv_z * (zeroth_body + zeroth_tail),
        second: inv_z * (second_body + second_tail),
    })
}

/// Sub-integrals in closed form: `½ B(γ,φ')/B(γ,φ'-½)` and
/// `¼ η²/(γ+φ'-3/2) · B(γ,φ')/B(γ,φ'-½)`.
pub fn sub_integrals_closed_form(reference: &QGaussianParams, equity: &QGaussianParams) -> Option<SubIntegrals> {
    let gamma = equity.phi() / reference.phi();
    let phi_eq = equity.phi();
    let margin = gamma + phi_eq - 1.5;
    if !(margin > 0.0) {
        return None;
    }
    let ratio = (log_beta(gamma, phi_eq).ok()? - log_beta(gamma, phi_eq - 0.5).ok()?).exp();
    let eta_sq = reference.kappa() / equity.kappa();
    Some(SubIntegrals {
        zeroth: 0.5 * ratio,
        second: 0.25 * eta_sq / margin * ratio,
    })
}
