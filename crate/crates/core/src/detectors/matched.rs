//! Matched-filter detectors. Both form a single Gaussian statistic `eta` from
//! the whole sequence and declare H1 when `eta > lambda`.
//!
//! OOK: `eta` sums the received samples at the signature's ones, so its mean is
//! the number of those positions the transmitted sequence also sets.
//! BPSK: symbols are `+1/-1` at the same noise level as OOK, and
//! `eta = sum s~[k] z[k]` has mean `L - 2 * (Hamming distance)`. At equal peak
//! amplitude this gives BPSK four times the per-bit distance energy of OOK.

use super::{Conditionals, DetectionStats};
use crate::error::{domain, Result};
use crate::model::{binom, q, NoiseModel, Priors, Signature};

fn tail(lambda: f64, mean: f64, sd: f64) -> f64 {
    q((lambda - mean) / sd)
}

/// Wrong sequences whose ones overlap the signature's ones in exactly `i`
/// places: `C(d, i) 2^(L - d)`, less the signature itself at `i = d`.
pub fn ook_overlap_count(len: u32, ones: u32, i: u32) -> f64 {
    let all = binom(ones, i) * 2f64.powi((len - ones) as i32);
    if i == ones {
        all - 1.0
    } else {
        all
    }
}

pub fn ook_conditionals(sig: &Signature, lambda: f64, noise: &NoiseModel) -> Result<Conditionals> {
    let (len, d) = (sig.len(), sig.ones());
    if d == 0 {
        return domain("OOK matched filter needs a signature with at least one 1");
    }
    if lambda.is_nan() {
        return domain("threshold is NaN");
    }
    let sd = (d as f64).sqrt() * noise.sigma();
    let wrong = 2f64.powi(len as i32) - 1.0;
    let h0b = (0..=d)
        .map(|i| ook_overlap_count(len, d, i) * tail(lambda, i as f64, sd))
        .sum::<f64>()
        / wrong;
    Ok(Conditionals {
        h1: tail(lambda, d as f64, sd),
        h0a: tail(lambda, 0.0, sd),
        h0b,
    })
}

pub fn bpsk_conditionals(len: u32, lambda: f64, noise: &NoiseModel) -> Result<Conditionals> {
    if len == 0 || len > crate::model::MAX_LEN {
        return domain(format!("sequence length {len} unsupported"));
    }
    if lambda.is_nan() {
        return domain("threshold is NaN");
    }
    let n = len as f64;
    let sd = n.sqrt() * noise.sigma();
    let wrong = 2f64.powi(len as i32) - 1.0;
    let h0b = (1..=len)
        .map(|i| binom(len, i) * tail(lambda, n - 2.0 * i as f64, sd))
        .sum::<f64>()
        / wrong;
    Ok(Conditionals {
        h1: tail(lambda, n, sd),
        h0a: tail(lambda, 0.0, sd),
        h0b,
    })
}

pub fn ook_mf_stats(sig: &Signature, lambda_mf: f64, noise: &NoiseModel, priors: &Priors) -> Result<DetectionStats> {
    ook_conditionals(sig, lambda_mf, noise)?.stats(priors)
}

pub fn bpsk_mf_stats(len: u32, lambda_mf: f64, noise: &NoiseModel, priors: &Priors) -> Result<DetectionStats> {
    bpsk_conditionals(len, lambda_mf, noise)?.stats(priors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::mask;
    use proptest::prelude::*;

    #[test]
    fn threshold_at_mean() {
        let sig: Signature = "10011010".parse().unwrap();
        for snr in [0.0, 10.0] {
            let n = NoiseModel::from_snr_db(snr).unwrap();
            assert_eq!(ook_conditionals(&sig, 4.0, &n).unwrap().h1, 0.5);
            assert_eq!(bpsk_conditionals(8, 8.0, &n).unwrap().h1, 0.5);
        }
        let n = NoiseModel::from_sigma(1e-9).unwrap();
        assert_eq!(bpsk_conditionals(8, 0.0, &n).unwrap().h0a, 0.5);
    }

    #[test]
    fn overlap_counts_enumerate() {
        assert_eq!(ook_overlap_count(8, 4, 4), 15.0);
        let sig: Signature = "1011001110".parse().unwrap();
        let mut hist = vec![0.0; sig.ones() as usize + 1];
        for x in 0..=mask(sig.len()) {
            if x != sig.word() {
                hist[(x & sig.word()).count_ones() as usize] += 1.0;
            }
        }
        for (i, h) in hist.iter().enumerate() {
            assert_eq!(ook_overlap_count(sig.len(), sig.ones(), i as u32), *h);
        }
    }

    #[test]
    fn h0b_matches_enumeration() {
        let sig: Signature = "10011010".parse().unwrap();
        let n = NoiseModel::from_snr_db(6.0).unwrap();
        let s = n.sigma();
        for lambda in [-3.0, 0.0, 1.7, 4.2, 9.0] {
            let mut ook = 0.0;
            let mut bpsk = 0.0;
            for x in 0..=mask(8) {
                if x == sig.word() {
                    continue;
                }
                let overlap = (x & sig.word()).count_ones() as f64;
                ook += q((lambda - overlap) / (2.0 * s));
                let dist = (x ^ sig.word()).count_ones() as f64;
                bpsk += q((lambda - (8.0 - 2.0 * dist)) / (8f64.sqrt() * s));
            }
            let c = ook_conditionals(&sig, lambda, &n).unwrap();
            assert!((c.h0b - ook / 255.0).abs() < 1e-13);
            let c = bpsk_conditionals(8, lambda, &n).unwrap();
            assert!((c.h0b - bpsk / 255.0).abs() < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn probabilities_in_range_and_monotone(
            len in 2u32..=16,
            word in any::<u64>(),
            lambda in -20.0f64..20.0,
            step in 0.0f64..2.0,
            snr in 0.0f64..20.0,
        ) {
            let sig = Signature::from_word(word | 1, len).unwrap();
            let n = NoiseModel::from_snr_db(snr).unwrap();
            let pairs = [
                (ook_conditionals(&sig, lambda, &n).unwrap(), ook_conditionals(&sig, lambda + step, &n).unwrap()),
                (bpsk_conditionals(len, lambda, &n).unwrap(), bpsk_conditionals(len, lambda + step, &n).unwrap()),
            ];
            for (lo, hi) in pairs {
                for (a, b) in [(lo.h1, hi.h1), (lo.h0a, hi.h0a), (lo.h0b, hi.h0b)] {
                    prop_assert!((0.0..=1.0).contains(&a));
                    prop_assert!(b <= a + 1e-15);
                }
            }
        }
    }
}
