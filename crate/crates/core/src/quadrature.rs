//! Globally adaptive Gauss–Kronrod (7/15) quadrature and closed-form
//! power-law tails.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("integration did not converge: estimate {value} with error {error} after {intervals} intervals")]
    NonConvergent { value: f64, error: f64, intervals: usize },
    #[error("integrand produced a non-finite value at x = {0}")]
    NonFinite(f64),
    #[error("tail integral diverges: exponent {0}")]
    DivergentTail(f64),
    #[error("invalid integration range [{0}, {1}]")]
    BadRange(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-12,
            rel: 1e-12,
            max_intervals: 4000,
        }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment, QuadratureError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    if !fc.is_finite() {
        return Err(QuadratureError::NonFinite(center));
    }
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        if !f1.is_finite() {
            return Err(QuadratureError::NonFinite(center - dx));
        }
        if !f2.is_finite() {
            return Err(QuadratureError::NonFinite(center + dx));
        }
        kronrod += wk * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Ok(Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    })
}

/// Integrate `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Integral, QuadratureError> {
    integrate_pieces(f, &[a, b], tol)
}

/// Integrate `f` over the union of consecutive intervals given by
/// `breaks` (ascending). Seeding the refinement with breakpoints keeps
/// narrow features on long ranges from being sampled past.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: Tolerance) -> Result<Integral, QuadratureError> {
    if breaks.len() < 2 {
        return Ok(Integral { value: 0.0, error: 0.0 });
    }
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(a.is_finite() && b.is_finite()) || b < a {
            return Err(QuadratureError::BadRange(a, b));
        }
        if b > a {
            heap.push(gk15(&f, a, b)?);
        }
    }
    loop {
        let (value, error) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
        if error <= tol.abs.max(tol.rel * value.abs()) {
            return Ok(Integral { value, error });
        }
        if heap.len() >= tol.max_intervals {
            return Err(QuadratureError::NonConvergent {
                value,
                error,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval cannot be split further in floating point.
            return Err(QuadratureError::NonConvergent {
                value,
                error,
                intervals: heap.len() + 1,
            });
        }
        heap.push(gk15(&f, worst.a, mid)?);
        heap.push(gk15(&f, mid, worst.b)?);
    }
}

/// Geometric breakpoints `0, s, 2s, 4s, ...` up to `end` inclusive.
pub fn geometric_breaks(scale: f64, end: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    let mut x = scale;
    while x < end {
        out.push(x);
        x *= 2.0;
    }
    out.push(end);
    out
}

/// Closed-form `∫_t^∞ u^(2m) (1 + κu²)^(-a) du` by expanding the bracket in
/// powers of `1/(κu²)`. Requires `κt² >> 1` (at least 4) and
/// `2a - 2m - 1 > 0`.
pub fn power_law_tail(a: f64, kappa: f64, t: f64, m: u32) -> Result<f64, QuadratureError> {
    let m = f64::from(m);
    let exponent = 2.0 * a - 2.0 * m - 1.0;
    if exponent <= 0.0 {
        return Err(QuadratureError::DivergentTail(exponent));
    }
    let z = kappa * t * t;
    if !(z >= 4.0) {
        return Err(QuadratureError::BadRange(t, f64::INFINITY));
    }
    // Leading term κ^-a t^(2m - 2a + 1) / (2a - 2m - 1).
    let ln_lead = -a * kappa.ln() + (2.0 * m - 2.0 * a + 1.0) * t.ln();
    if ln_lead < -745.0 {
        return Ok(0.0);
    }
    let x = 1.0 / z;
    let mut sum = 0.0;
    let mut coeff = 1.0; // (-1)^k (a)_k / k!
    let mut xk = 1.0;
    for k in 0..500 {
        let kf = f64::from(k);
        let term = coeff * xk / (exponent + 2.0 * kf);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            return Ok(ln_lead.exp() * sum);
        }
        coeff *= -(a + kf) / (kf + 1.0);
        xk *= x;
    }
    Err(QuadratureError::NonConvergent {
        value: ln_lead.exp() * sum,
        error: f64::NAN,
        intervals: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| 3.0 * x * x + 1.0, 0.0, 2.0, Tolerance::default()).unwrap();
        assert!((r.value - 10.0).abs() < 1e-13);
    }

    #[test]
    fn gaussian_on_long_range_with_breaks() {
        let breaks = geometric_breaks(1.0, 1e4);
        let r = integrate_pieces(|x| (-x * x).exp(), &breaks, Tolerance::default()).unwrap();
        assert!((r.value - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn tail_matches_known_antiderivative() {
        // ∫_t^∞ (1 + u²)^-1 du = π/2 - atan t
        let t = 10.0;
        let got = power_law_tail(1.0, 1.0, t, 0).unwrap();
        let want = std::f64::consts::FRAC_PI_2 - t.atan();
        assert!((got - want).abs() < 1e-15);
        // ∫_t^∞ u² (1 + u²)^-2 du = [atan u / 2 - u / (2(1+u²))]_t^∞
        let got = power_law_tail(2.0, 1.0, t, 1).unwrap();
        let want = std::f64::consts::FRAC_PI_4 - 0.5 * t.atan() + t / (2.0 * (1.0 + t * t));
        assert!((got - want).abs() < 1e-15);
    }

    #[test]
    fn tail_rejects_divergence() {
        assert!(matches!(power_law_tail(1.4, 1.0, 10.0, 1), Err(QuadratureError::DivergentTail(_))));
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        assert!(matches!(
            integrate(|x| 1.0 / (x - 0.5), 0.0, 1.0, Tolerance::default()),
            Err(QuadratureError::NonFinite(_))
        ));
    }
}
