//! Single-sample energy detector: declare H1 when `z[1] > lambda`.

use super::Conditionals;
use crate::error::Result;
use crate::model::{BitProbs, NoiseModel, Priors, Signature};

/// `P_D^ED = Q((lambda - 1) / sigma)`.
pub fn ed_pd(lambda: f64, noise: &NoiseModel) -> f64 {
    BitProbs::new(lambda, noise).p1c
}

/// `P_FA^ED = [(1 - P0C) P(H0A) + P1C P(H0B)] / P(H0)`.
pub fn ed_pfa(lambda: f64, noise: &NoiseModel, priors: &Priors) -> Result<f64> {
    let (wa, wb) = priors.h0_weights()?;
    let b = BitProbs::new(lambda, noise);
    Ok(wa * b.e0() + wb * b.p1c)
}

/// Conditionals behind [`ed_pd`] and [`ed_pfa`]: wrong sequences always
/// present a one in the trigger position.
pub fn ed_conditionals(lambda: f64, noise: &NoiseModel) -> Conditionals {
    let b = BitProbs::new(lambda, noise);
    Conditionals {
        h1: b.p1c,
        h0a: b.e0(),
        h0b: b.p1c,
    }
}

/// First-bit trigger probabilities when H0B is uniform over every wrong
/// sequence: of the `2^L - 1` candidates, `2^(L-1) - 1` start with a one and
/// `2^(L-1)` start with a zero.
pub fn trigger_conditionals_uniform(sig: &Signature, lambda: f64, noise: &NoiseModel) -> Conditionals {
    let b = BitProbs::new(lambda, noise);
    let half = 2f64.powi(sig.len() as i32 - 1);
    let wrong = 2.0 * half - 1.0;
    Conditionals {
        h1: b.p1c,
        h0a: b.e0(),
        h0b: ((half - 1.0) * b.p1c + half * b.e0()) / wrong,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_at_mean() {
        let n = NoiseModel::from_sigma(0.5).unwrap();
        assert_eq!(ed_pd(1.0, &n), 0.5);
    }

    #[test]
    fn noiseless_false_alarm_is_h0b_share() {
        let n = NoiseModel::from_sigma(1e-9).unwrap();
        let p = Priors::default();
        let got = ed_pfa(0.5, &n, &p).unwrap();
        let expect = p.h0b() / (p.h0a() + p.h0b());
        assert!((got - expect).abs() < 1e-15);
        assert!((expect - 0.099_609_375 / 0.999_609_375).abs() < 1e-15);
    }

    #[test]
    fn infinite_threshold_never_triggers() {
        let n = NoiseModel::from_snr_db(3.0).unwrap();
        assert!(ed_pfa(f64::INFINITY, &n, &Priors::default()).unwrap() < 1e-12);
        assert!(ed_pfa(1e6, &n, &Priors::default()).unwrap() < 1e-12);
    }

    #[test]
    fn fifteen_db_detection() {
        let n = NoiseModel::from_snr_db(15.0).unwrap();
        assert!((ed_pd(0.5, &n) - 0.997_54).abs() < 5e-6);
    }

    #[test]
    fn uniform_trigger_counts() {
        let sig = Signature::balanced(3).unwrap();
        // Wrong sequences of length 3: 3 start with one, 4 with zero.
        let n = NoiseModel::from_sigma(1e-9).unwrap();
        let c = trigger_conditionals_uniform(&sig, 0.5, &n);
        assert!((c.h0b - 3.0 / 7.0).abs() < 1e-12);
    }
}
