//! Entropies of discrete probability vectors.

use thiserror::Error;

use crate::specfun::q_log;

const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiscreteError {
    #[error("probability vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("not a probability vector: {0}")]
    NotProbability(String),
    #[error("support mismatch at index {index}: p = {p} but r = 0")]
    SupportMismatch { index: usize, p: f64 },
    #[error("q must be finite, got {0}")]
    BadQ(f64),
}

fn check_probability(v: &[f64]) -> Result<(), DiscreteError> {
    if let Some((i, x)) = v.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x >= 0.0)) {
        return Err(DiscreteError::NotProbability(format!("entry {i} is {x}")));
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(DiscreteError::NotProbability(format!("sums to {sum}")));
    }
    Ok(())
}

fn check_pair(p: &[f64], r: &[f64]) -> Result<(), DiscreteError> {
    if p.len() != r.len() {
        return Err(DiscreteError::LengthMismatch(p.len(), r.len()));
    }
    check_probability(p)?;
    check_probability(r)
}

/// `S_T(P‖R) = -Σ p_i ln_q(r_i / p_i)`, equal to
/// `(Σ p_i (p_i/r_i)^(q-1) - 1) / (q - 1)`.
pub fn tre_discrete(p: &[f64], r: &[f64], q: f64) -> Result<f64, DiscreteError> {
    if !q.is_finite() {
        return Err(DiscreteError::BadQ(q));
    }
    check_pair(p, r)?;
    let mut total = 0.0;
    for (index, (&pi, &ri)) in p.iter().zip(r).enumerate() {
        if pi == 0.0 {
            continue;
        }
        if ri == 0.0 {
            if q >= 1.0 {
                return Err(DiscreteError::SupportMismatch { index, p: pi });
            }
            // (r/p)^(1-q) -> 0 for q < 1.
            total += pi / (1.0 - q);
            continue;
        }
        total -= pi * q_log(ri / pi, q).expect("positive ratio");
    }
    Ok(total)
}

/// Kullback–Leibler divergence `Σ p_i ln(p_i / r_i)`.
pub fn kl_discrete(p: &[f64], r: &[f64]) -> Result<f64, DiscreteError> {
    check_pair(p, r)?;
    let mut total = 0.0;
    for (index, (&pi, &ri)) in p.iter().zip(r).enumerate() {
        if pi == 0.0 {
            continue;
        }
        if ri == 0.0 {
            return Err(DiscreteError::SupportMismatch { index, p: pi });
        }
        total += pi * (pi / ri).ln();
    }
    Ok(total)
}

/// Tsallis entropy `(1 - Σ p_i^q) / (q - 1)`, evaluated as `Σ p_i ln_q(1/p_i)`.
pub fn tsallis_entropy_discrete(p: &[f64], q: f64) -> Result<f64, DiscreteError> {
    if !q.is_finite() {
        return Err(DiscreteError::BadQ(q));
    }
    check_probability(p)?;
    Ok(p
        .iter()
        .filter(|&&pi| pi > 0.0)
        .map(|&pi| pi * q_log(1.0 / pi, q).expect("positive"))
        .sum())
}

/// Shannon entropy `Σ p_i ln(1/p_i)`.
pub fn shannon_entropy_discrete(p: &[f64]) -> Result<f64, DiscreteError> {
    check_probability(p)?;
    Ok(p.iter().filter(|&&pi| pi > 0.0).map(|&pi| -pi * pi.ln()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn product(a: &[f64], b: &[f64]) -> Vec<f64> {
        a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect()
    }

    fn simplex(raw: &[f64]) -> Vec<f64> {
        let s: f64 = raw.iter().sum();
        raw.iter().map(|x| x / s).collect()
    }

    #[test]
    fn tre_examples() {
        let u = [0.25; 4];
        assert_eq!(tre_discrete(&u, &u, 1.7).unwrap(), 0.0);
        let p = [0.7, 0.3];
        let r = [0.5, 0.5];
        let kl = 0.7 * 1.4f64.ln() + 0.3 * 0.6f64.ln();
        assert!((kl - 0.082_282).abs() < 1e-6);
        assert!((tre_discrete(&p, &r, 1.0 + 1e-9).unwrap() - kl).abs() < 1e-8);
        assert!((tre_discrete(&p, &r, 1.0).unwrap() - kl).abs() < 1e-15);
    }

    #[test]
    fn tre_matches_power_form() {
        let p: [f64; 3] = [0.1, 0.6, 0.3];
        let r: [f64; 3] = [0.3, 0.3, 0.4];
        let q = 1.8;
        let power: f64 = p.iter().zip(&r).map(|(pi, ri)| pi * (pi / ri).powf(q - 1.0)).sum();
        let want = (power - 1.0) / (q - 1.0);
        assert!((tre_discrete(&p, &r, q).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn support_mismatch() {
        let p = [0.5, 0.5];
        let r = [1.0, 0.0];
        assert!(matches!(tre_discrete(&p, &r, 1.5), Err(DiscreteError::SupportMismatch { index: 1, .. })));
        assert!(matches!(kl_discrete(&p, &r), Err(DiscreteError::SupportMismatch { index: 1, .. })));
        assert!(tre_discrete(&p, &r, 0.5).unwrap().is_finite());
        // r may vanish where p does.
        assert!(tre_discrete(&r, &p, 1.5).is_ok());
    }

    #[test]
    fn input_validation() {
        assert!(matches!(kl_discrete(&[1.0], &[0.5, 0.5]), Err(DiscreteError::LengthMismatch(1, 2))));
        assert!(kl_discrete(&[0.6, 0.6], &[0.5, 0.5]).is_err());
        assert!(kl_discrete(&[1.5, -0.5], &[0.5, 0.5]).is_err());
        assert!(tsallis_entropy_discrete(&[0.5, 0.5], f64::NAN).is_err());
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl_discrete(&[0.2, 0.8], &[0.2, 0.8]).unwrap(), 0.0);
        assert!((kl_discrete(&[1.0, 0.0], &[0.5, 0.5]).unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn tsallis_examples() {
        assert_eq!(tsallis_entropy_discrete(&[1.0, 0.0, 0.0], 1.7).unwrap(), 0.0);
        assert!((tsallis_entropy_discrete(&[0.5, 0.5], 1.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!((tsallis_entropy_discrete(&[0.5, 0.5], 1.0 + 1e-9).unwrap() - 2f64.ln()).abs() < 1e-8);
        // (1 - Σp^q)/(q-1)
        let p = [0.2, 0.3, 0.5];
        let q = 2.0;
        let want = (1.0 - p.iter().map(|x: &f64| x.powf(q)).sum::<f64>()) / (q - 1.0);
        assert!((tsallis_entropy_discrete(&p, q).unwrap() - want).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn tre_pseudo_additivity(a in prop::collection::vec(0.05f64..1.0, 3),
                                 b in prop::collection::vec(0.05f64..1.0, 4),
                                 c in prop::collection::vec(0.05f64..1.0, 3),
                                 d in prop::collection::vec(0.05f64..1.0, 4),
                                 q in 0.3f64..2.5) {
            let (p1, p2, r1, r2) = (simplex(&a), simplex(&b), simplex(&c), simplex(&d));
            let s1 = tre_discrete(&p1, &r1, q).unwrap();
            let s2 = tre_discrete(&p2, &r2, q).unwrap();
            let joint = tre_discrete(&product(&p1, &p2), &product(&r1, &r2), q).unwrap();
            prop_assert!((joint - (s1 + s2 + (q - 1.0) * s1 * s2)).abs() < 1e-10);
        }

        #[test]
        fn kl_additivity(a in prop::collection::vec(0.05f64..1.0, 3),
                         b in prop::collection::vec(0.05f64..1.0, 4),
                         c in prop::collection::vec(0.05f64..1.0, 3),
                         d in prop::collection::vec(0.05f64..1.0, 4)) {
            let (p1, p2, r1, r2) = (simplex(&a), simplex(&b), simplex(&c), simplex(&d));
            let joint = kl_discrete(&product(&p1, &p2), &product(&r1, &r2)).unwrap();
            let sum = kl_discrete(&p1, &r1).unwrap() + kl_discrete(&p2, &r2).unwrap();
            prop_assert!((joint - sum).abs() < 1e-12);
        }

        #[test]
        fn tsallis_pseudo_additivity(a in prop::collection::vec(0.05f64..1.0, 3),
                                     b in prop::collection::vec(0.05f64..1.0, 5),
                                     q in 0.3f64..2.5) {
            let (pa, pb) = (simplex(&a), simplex(&b));
            let sa = tsallis_entropy_discrete(&pa, q).unwrap();
            let sb = tsallis_entropy_discrete(&pb, q).unwrap();
            let joint = tsallis_entropy_discrete(&product(&pa, &pb), q).unwrap();
            prop_assert!((joint - (sa + sb + (1.0 - q) * sa * sb)).abs() < 1e-10);
        }

        #[test]
        fn tre_tends_to_kl(a in prop::collection::vec(0.01f64..1.0, 6),
                           c in prop::collection::vec(0.01f64..1.0, 6)) {
            let (p, r) = (simplex(&a), simplex(&c));
            let kl = kl_discrete(&p, &r).unwrap();
            prop_assert!((tre_discrete(&p, &r, 1.0 + 1e-7).unwrap() - kl).abs() < 1e-6);
            prop_assert!(kl >= -1e-12);
        }

        #[test]
        fn tre_non_negative(a in prop::collection::vec(0.0f64..1.0, 5),
                            c in prop::collection::vec(0.01f64..1.0, 5),
                            q in 0.05f64..3.0) {
            prop_assume!(a.iter().sum::<f64>() > 0.1);
            let (p, r) = (simplex(&a), simplex(&c));
            prop_assert!(tre_discrete(&p, &r, q).unwrap() >= -1e-12);
        }
    }
}
