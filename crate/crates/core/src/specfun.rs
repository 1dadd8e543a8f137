//! q-deformed elementary functions and log-gamma/log-beta helpers.
//!
//! Everything here is a pure function of its arguments. Gamma ratios are
//! always formed in log space: `1/(q-1)` grows without bound as `q -> 1`
//! and `Γ` overflows past 171.

use std::f64::consts::PI;

use thiserror::Error;

/// Below this distance from `q = 1` the q-functions evaluate the ordinary
/// `ln`/`exp` limit.
pub const Q_SWITCH: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{op}: {detail}")]
pub struct DomainError {
    pub op: &'static str,
    pub detail: String,
}

impl DomainError {
    pub(crate) fn new(op: &'static str, detail: impl Into<String>) -> Self {
        Self {
            op,
            detail: detail.into(),
        }
    }
}

/// The q-logarithm `(x^(1-q) - 1) / (1 - q)`.
pub fn q_log(x: f64, q: f64) -> Result<f64, DomainError> {
    if !x.is_finite() || x <= 0.0 {
        return Err(DomainError::new("q_log", format!("x must be positive and finite, got {x}")));
    }
    if !q.is_finite() {
        return Err(DomainError::new("q_log", format!("q must be finite, got {q}")));
    }
    let one_minus_q = 1.0 - q;
    if one_minus_q.abs() < Q_SWITCH {
        return Ok(x.ln());
    }
    // expm1 keeps full precision when (1-q) ln x is small.
    Ok((one_minus_q * x.ln()).exp_m1() / one_minus_q)
}

/// The q-exponential `[1 + (1-q) x]^(1/(1-q))`, inverse of [`q_log`].
///
/// For `q > 1` a non-positive bracket yields `0`; for `q < 1` it is a
/// domain error.
pub fn q_exp(x: f64, q: f64) -> Result<f64, DomainError> {
    if !x.is_finite() || !q.is_finite() {
        return Err(DomainError::new("q_exp", format!("non-finite input x={x}, q={q}")));
    }
    let one_minus_q = 1.0 - q;
    if one_minus_q.abs() < Q_SWITCH {
        return Ok(x.exp());
    }
    let bracket_m1 = one_minus_q * x;
    if bracket_m1 <= -1.0 {
        return if q > 1.0 {
            Ok(0.0)
        } else {
            Err(DomainError::new(
                "q_exp",
                format!("1 + (1-q)x = {} is outside the support for q={q}", 1.0 + bracket_m1),
            ))
        };
    }
    Ok((bracket_m1.ln_1p() / one_minus_q).exp())
}

/// Natural log of `Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64, DomainError> {
    if !x.is_finite() || x <= 0.0 {
        return Err(DomainError::new("log_gamma", format!("x must be positive and finite, got {x}")));
    }
    Ok(libm::lgamma_r(x).0)
}

/// Natural log of `B(a, b)`.
pub fn log_beta(a: f64, b: f64) -> Result<f64, DomainError> {
    if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
        return Err(DomainError::new("log_beta", format!("arguments must be positive, got a={a}, b={b}")));
    }
    Ok(log_gamma(a)? + log_gamma(b)? - log_gamma(a + b)?)
}

/// `ln C_q` where `C_q = √π Γ(1/(q-1) - 1/2) / (√(q-1) Γ(1/(q-1)))`.
pub fn ln_c_q(q: f64) -> Result<f64, DomainError> {
    if !(q.is_finite() && q > 1.0 && q < 3.0) {
        return Err(DomainError::new("c_q", format!("requires 1 < q < 3, got {q}")));
    }
    let phi = 1.0 / (q - 1.0);
    Ok(0.5 * PI.ln() + log_gamma(phi - 0.5)? - 0.5 * (q - 1.0).ln() - log_gamma(phi)?)
}

/// Normalization constant of the unit-temperature q-Gaussian, `C_q`.
pub fn c_q(q: f64) -> Result<f64, DomainError> {
    ln_c_q(q).map(f64::exp)
}

/// Regularized incomplete beta `I_x(a, b)`.
///
/// `y` must equal `1 - x`; passing it separately keeps precision when `x`
/// is within rounding of 1.
pub fn beta_inc_reg(a: f64, b: f64, x: f64, y: f64) -> Result<f64, DomainError> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(DomainError::new("beta_inc_reg", format!("a, b must be positive, got a={a}, b={b}")));
    }
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
        return Err(DomainError::new("beta_inc_reg", format!("x must lie in [0, 1], got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if y == 0.0 {
        return Ok(1.0);
    }
    let ln_front = a * x.ln() + b * y.ln() - log_beta(a, b)?;
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(ln_front.exp() * beta_cf(a, b, x)? / a)
    } else {
        Ok(1.0 - ln_front.exp() * beta_cf(b, a, y)? / b)
    }
}

/// Continued fraction for the incomplete beta, modified Lentz.
fn beta_cf(a: f64, b: f64, x: f64) -> Result<f64, DomainError> {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    const MAX_ITER: usize = 20_000;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            return Ok(h);
        }
    }
    Err(DomainError::new(
        "beta_inc_reg",
        format!("continued fraction did not converge for a={a}, b={b}, x={x}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel_err(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn q_log_examples() {
        assert_eq!(q_log(1.0, 1.7).unwrap(), 0.0);
        assert!((q_log(std::f64::consts::E, 1.0).unwrap() - 1.0).abs() < 1e-15);
        // (2^-0.5 - 1) / -0.5
        assert!((q_log(2.0, 1.5).unwrap() - 0.585_786_437_626_904_9).abs() < 1e-15);
    }

    #[test]
    fn q_log_rejects_bad_input() {
        assert!(q_log(0.0, 1.5).is_err());
        assert!(q_log(-1.0, 1.5).is_err());
        assert!(q_log(f64::NAN, 1.5).is_err());
        assert!(q_log(2.0, f64::INFINITY).is_err());
    }

    #[test]
    fn q_log_continuous_across_switch() {
        for &x in &[0.01, 0.5, 2.0, 50.0] {
            let inside = q_log(x, 1.0 + 0.5 * Q_SWITCH).unwrap();
            let outside = q_log(x, 1.0 + 2.0 * Q_SWITCH).unwrap();
            assert!((inside - outside).abs() < 1e-7 * x.ln().abs().max(1.0));
        }
    }

    #[test]
    fn q_exp_examples() {
        assert_eq!(q_exp(0.0, 2.3).unwrap(), 1.0);
        assert!((q_exp(1.0, 1.0).unwrap() - std::f64::consts::E).abs() < 1e-15);
        let x = q_log(3.7, 1.4).unwrap();
        assert!((q_exp(x, 1.4).unwrap() - 3.7).abs() < 3.7e-12);
    }

    #[test]
    fn q_exp_support_cut() {
        // q > 1: bracket 1 + (1-q)x <= 0 once x >= 1/(q-1).
        assert_eq!(q_exp(2.0, 1.5).unwrap(), 0.0);
        assert_eq!(q_exp(10.0, 1.5).unwrap(), 0.0);
        // q < 1: x <= -1/(1-q) is outside the domain.
        assert!(q_exp(-3.0, 0.5).is_err());
    }

    #[test]
    fn log_gamma_examples() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert!(rel_err(log_gamma(0.5).unwrap(), 0.572_364_942_924_700_1) < 1e-14);
        assert!(rel_err(log_gamma(10.0).unwrap(), 362_880f64.ln()) < 1e-14);
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-2.5).is_err());
    }

    #[test]
    fn log_gamma_matches_high_precision_values() {
        // Reference values from mpmath.loggamma at 50 digits.
        let table = [
            (0.1, 2.252_712_651_734_205_959_9),
            (1.5, -0.120_782_237_635_245_222_35),
            (3.3, 0.987_098_577_894_734_587_88),
            (25.25, 55.585_686_044_869_429_708),
            (171.5, 709.143_163_030_928_242_27),
            (1.0e6, 12_815_504.569_147_611_66),
        ];
        for (x, want) in table {
            let got = log_gamma(x).unwrap();
            assert!(rel_err(got, want) < 1e-13, "lgamma({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn log_beta_examples() {
        assert!(log_beta(1.0, 1.0).unwrap().abs() < 1e-15);
        assert!((log_beta(2.0, 3.0).unwrap() - (1.0f64 / 12.0).ln()).abs() < 1e-14);
        assert!((log_beta(0.5, 0.5).unwrap() - PI.ln()).abs() < 1e-14);
        assert!(log_beta(0.0, 1.0).is_err());
        assert!(log_beta(1.0, -1.0).is_err());
    }

    #[test]
    fn c_q_examples() {
        // Γ(1.5) / (√0.5 Γ(2)) · √π = (√π/2)·√2·√π = π/√2
        assert!(rel_err(c_q(1.5).unwrap(), PI / 2f64.sqrt()) < 1e-14);
        assert!((c_q(1.5).unwrap() - 2.221_441).abs() < 1e-6);
        assert!(rel_err(c_q(2.0).unwrap(), PI) < 1e-14);
        assert!(c_q(1.0).is_err());
        assert!(c_q(3.0).is_err());
        assert!(c_q(0.5).is_err());
    }

    #[test]
    fn c_q_gaussian_limit() {
        // As q -> 1 the unit-temperature normalization tends to √π.
        let c = c_q(1.000_001).unwrap();
        assert!(rel_err(c, PI.sqrt()) < 1e-6);
    }

    #[test]
    fn beta_inc_reg_known_values() {
        // I_x(1, 1) = x; I_x(a, 1) = x^a; I_{1/2}(a, a) = 1/2.
        assert!((beta_inc_reg(1.0, 1.0, 0.3, 0.7).unwrap() - 0.3).abs() < 1e-15);
        assert!((beta_inc_reg(2.5, 1.0, 0.4, 0.6).unwrap() - 0.4f64.powf(2.5)).abs() < 1e-14);
        assert!((beta_inc_reg(3.7, 3.7, 0.5, 0.5).unwrap() - 0.5).abs() < 1e-14);
        // I_x(1/2, 1/2) = (2/π) asin(√x)
        let x: f64 = 0.2;
        let want = 2.0 / PI * x.sqrt().asin();
        assert!((beta_inc_reg(0.5, 0.5, x, 1.0 - x).unwrap() - want).abs() < 1e-14);
        assert_eq!(beta_inc_reg(2.0, 3.0, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(beta_inc_reg(2.0, 3.0, 1.0, 0.0).unwrap(), 1.0);
    }

    proptest! {
        #[test]
        fn q_log_strictly_increasing(x in 1e-3f64..1e3, dx in 1e-3f64..10.0, q in 0.1f64..2.9) {
            prop_assert!(q_log(x + dx, q).unwrap() > q_log(x, q).unwrap());
        }

        #[test]
        fn neg_q_log_is_convex(x in 1e-2f64..1e2, q in 0.05f64..2.9) {
            let h = 1e-3 * x;
            let f = |t: f64| -q_log(t, q).unwrap();
            let second = f(x + h) - 2.0 * f(x) + f(x - h);
            prop_assert!(second >= -1e-9);
        }

        #[test]
        fn q_exp_inverts_q_log(lx in (1e-3f64).ln()..(1e3f64).ln(), q in 0.5f64..2.9) {
            let x = lx.exp();
            let back = q_exp(q_log(x, q).unwrap(), q).unwrap();
            // q_exp amplifies the rounding of its argument by ~x^(q-1); far
            // out in the (x > 1, q > 2) corner that exceeds 1e-12 in f64.
            let conditioning = 4.0 * f64::EPSILON * x.powf(q - 1.0);
            prop_assert!(((back - x) / x).abs() < 1e-12f64.max(conditioning));
        }
    }
}
