//! Two-phase correlator: the first thresholded bit wakes the second phase,
//! which compares the thresholded sequence against the signature and accepts
//! up to `l` mismatches.
//!
//! Mismatch counts are sums of independent binomials, one per position class
//! (transmitted bit, signature bit), so every conditional probability is a
//! CDF of a small convolution. Wrong sequences are grouped by how many of
//! the signature's ones they drop (`j`) and how many zeros they raise (`i`).

use super::{Conditionals, DetectionStats};
use crate::error::{domain, Result};
use crate::model::{binom, binomial, BitProbs, DetectorParams, NoiseModel, Priors, Signature};

/// Which bits the mismatch allowance applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatchRule {
    /// Bit 1 must decode as one; at most `l` mismatches over bits `2..=L`.
    /// With `l >= L - 1` the rule reduces to the energy detector.
    Triggered,
    /// At most `l` mismatches over all `L` bits, no separate trigger.
    /// With `l = L` every outcome matches.
    HammingBall,
}

/// P(declare H1 | hypothesis) for every allowance `l = 0..=L` at one threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrProfile {
    pub h1: Vec<f64>,
    pub h0a: Vec<f64>,
    pub h0b: Vec<f64>,
}

impl CorrProfile {
    pub fn new(sig: &Signature, probs: &BitProbs, rule: MatchRule) -> Self {
        let len = sig.len();
        let d = sig.ones();
        let (p1c, p0c, e1, e0) = (probs.p1c, probs.p0c, probs.e1(), probs.e0());
        let wrong = 2f64.powi(len as i32) - 1.0;

        match rule {
            MatchRule::HammingBall => {
                let h1 = mismatch_cdf(&[(d, e1, p1c), (len - d, e0, p0c)], len);
                let h0a = mismatch_cdf(&[(d, p0c, e0), (len - d, e0, p0c)], len);
                let mut h0b = vec![0.0; len as usize + 1];
                for j in 0..=d {
                    for i in 0..=len - d {
                        if i == 0 && j == 0 {
                            continue;
                        }
                        let count = binom(d, j) * binom(len - d, i);
                        let cdf = mismatch_cdf(
                            &[(d - j, e1, p1c), (j, p0c, e0), (i, p1c, e1), (len - d - i, e0, p0c)],
                            len,
                        );
                        for (acc, c) in h0b.iter_mut().zip(&cdf) {
                            *acc += count * c;
                        }
                    }
                }
                h0b.iter_mut().for_each(|v| *v /= wrong);
                Self { h1, h0a, h0b }
            }
            MatchRule::Triggered => {
                // Classes over bits 2..=L: the signature has d - 1 ones there.
                let (dr, zr) = (d - 1, len - d);
                let scale = |v: Vec<f64>, f: f64| v.into_iter().map(|c| f * c).collect::<Vec<_>>();
                let h1 = scale(mismatch_cdf(&[(dr, e1, p1c), (zr, e0, p0c)], len), p1c);
                let h0a = scale(mismatch_cdf(&[(dr, p0c, e0), (zr, e0, p0c)], len), e0);
                let mut h0b = vec![0.0; len as usize + 1];
                for j in 0..=dr {
                    for i in 0..=zr {
                        let count = binom(dr, j) * binom(zr, i);
                        // Wrong sequences with this rest pattern: the one with
                        // a leading one is excluded when the rest matches.
                        let trigger = if i == 0 && j == 0 { e0 } else { p1c + e0 };
                        let cdf = mismatch_cdf(
                            &[(dr - j, e1, p1c), (j, p0c, e0), (i, p1c, e1), (zr - i, e0, p0c)],
                            len,
                        );
                        for (acc, c) in h0b.iter_mut().zip(&cdf) {
                            *acc += count * trigger * c;
                        }
                    }
                }
                h0b.iter_mut().for_each(|v| *v /= wrong);
                Self { h1, h0a, h0b }
            }
        }
    }

    pub fn at(&self, l: u32) -> Conditionals {
        let l = l as usize;
        Conditionals {
            h1: self.h1[l],
            h0a: self.h0a[l],
            h0b: self.h0b[l],
        }
    }
}

/// CDF, over `0..=max`, of the total mismatch count when each class contributes
/// a `Binomial(n, p)` number of mismatches. Classes are `(n, p, 1 - p)`.
fn mismatch_cdf(classes: &[(u32, f64, f64)], max: u32) -> Vec<f64> {
    let mut pmf = vec![1.0];
    for &(n, p, q) in classes {
        let mut next = vec![0.0; pmf.len() + n as usize];
        for k in 0..=n {
            let w = binom(n, k) * p.powi(k as i32) * q.powi((n - k) as i32);
            if w == 0.0 {
                continue;
            }
            for (m, &v) in pmf.iter().enumerate() {
                next[m + k as usize] += w * v;
            }
        }
        pmf = next;
    }
    let mut cdf = Vec::with_capacity(max as usize + 1);
    let mut acc = 0.0;
    let total = pmf.len() - 1;
    for k in 0..=max as usize {
        acc += pmf.get(k).copied().unwrap_or(0.0);
        // Past the largest possible count the bound is vacuous.
        cdf.push(if k >= total { 1.0 } else { acc.min(1.0) });
    }
    cdf
}

pub fn conditionals(
    sig: &Signature,
    params: &DetectorParams,
    noise: &NoiseModel,
    rule: MatchRule,
) -> Result<Conditionals> {
    params.check_for(sig)?;
    let probs = BitProbs::new(params.lambda, noise);
    Ok(CorrProfile::new(sig, &probs, rule).at(params.l))
}

/// P(declare H1 | H1) under the triggered rule.
pub fn corr_match_h1(sig: &Signature, params: &DetectorParams, noise: &NoiseModel) -> Result<f64> {
    Ok(conditionals(sig, params, noise, MatchRule::Triggered)?.h1)
}

/// P(declare H1 | H0A) under the triggered rule.
pub fn corr_match_h0a(sig: &Signature, params: &DetectorParams, noise: &NoiseModel) -> Result<f64> {
    Ok(conditionals(sig, params, noise, MatchRule::Triggered)?.h0a)
}

/// P(declare H1 | H0B) under the triggered rule, wrong sequences uniform.
pub fn corr_match_h0b(sig: &Signature, params: &DetectorParams, noise: &NoiseModel) -> Result<f64> {
    Ok(conditionals(sig, params, noise, MatchRule::Triggered)?.h0b)
}

pub fn corr_stats(
    sig: &Signature,
    params: &DetectorParams,
    noise: &NoiseModel,
    priors: &Priors,
) -> Result<DetectionStats> {
    conditionals(sig, params, noise, MatchRule::Triggered)?.stats(priors)
}

/// Number of wrong sequences that clear `j` of the signature's `d` ones and
/// set `i` of its `L - d` zeros: `C(L - d, i) * C(d, j)`.
pub fn wrong_sequence_count(len: u32, ones: u32, i: u32, j: u32) -> Result<u128> {
    if ones > len {
        return domain(format!("{ones} ones do not fit in {len} bits"));
    }
    let a = binomial(len - ones, i)?;
    let b = binomial(ones, j)?;
    a.checked_mul(b).ok_or(crate::error::Error::Overflow { n: len, k: i + j })
}

/// Number of length-`len` sequences with `n` ones at Hamming distance `k`
/// from a fixed sequence with `ones` ones.
///
/// With `f = n - ones`, a sequence at distance `k` raises `h + max(f, 0)`
/// zeros and clears `h + max(-f, 0)` ones, where `2h + |f| = k`.
pub fn received_pattern_count(len: u32, ones: u32, k: u32, n: u32) -> Result<u128> {
    if ones > len || n > len {
        return domain(format!("counts ({ones}, {n}) do not fit in {len} bits"));
    }
    let f = n as i64 - ones as i64;
    let k = k as i64;
    if k < f.abs() || (k - f.abs()) % 2 != 0 {
        return Ok(0);
    }
    let h = ((k - f.abs()) / 2) as u32;
    let (raised, cleared) = if f >= 0 {
        (h + f as u32, h)
    } else {
        (h, h + (-f) as u32)
    };
    let a = binomial(len - ones, raised)?;
    let b = binomial(ones, cleared)?;
    a.checked_mul(b).ok_or(crate::error::Error::Overflow { n: len, k: k as u32 })
}

/// H0B profile through the received side: sum, over every decoded pattern
/// within the allowance, the probability that *some* sequence produced it,
/// then drop the signature's own contribution.
///
/// Every transmitted sequence is equally likely, so the probability of a
/// decoded pattern with `n` ones summed over all transmits is `a^n b^(L-n)`
/// with `a = P1C + (1 - P0C)` and `b = P0C + (1 - P1C)`.
pub fn h0b_profile_by_patterns(sig: &Signature, probs: &BitProbs, rule: MatchRule) -> Result<Vec<f64>> {
    let len = sig.len();
    let d = sig.ones();
    let a = probs.p1c + probs.e0();
    let b = probs.p0c + probs.e1();
    let wrong = 2f64.powi(len as i32) - 1.0;
    let (span, span_ones, lead) = match rule {
        MatchRule::HammingBall => (len, d, 1.0),
        MatchRule::Triggered => (len - 1, d - 1, a),
    };
    let h1 = CorrProfile::new(sig, probs, rule).h1;
    let mut out = Vec::with_capacity(len as usize + 1);
    let mut acc = 0.0;
    for l in 0..=len {
        if l <= span {
            for n in 0..=span {
                let c = received_pattern_count(span, span_ones, l, n)? as f64;
                acc += c * a.powi(n as i32) * b.powi((span - n) as i32);
            }
        }
        out.push(((lead * acc - h1[l as usize]) / wrong).clamp(0.0, 1.0));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::mask;
    use proptest::prelude::*;

    fn default_sig() -> Signature {
        "10011010".parse().unwrap()
    }

    /// P(declare H1 | sent x), decoding every bit independently.
    fn brute_decision(sig: &Signature, probs: &BitProbs, x: u64, l: u32, rule: MatchRule) -> f64 {
        let len = sig.len();
        let mut total = 0.0;
        for y in 0..(1u64 << len) {
            let mut p = 1.0;
            for k in 0..len {
                let (xb, yb) = ((x >> k) & 1, (y >> k) & 1);
                p *= match (xb, yb) {
                    (1, 1) => probs.p1c,
                    (1, 0) => probs.e1(),
                    (0, 0) => probs.p0c,
                    _ => probs.e0(),
                };
            }
            let accept = match rule {
                MatchRule::HammingBall => (y ^ sig.word()).count_ones() <= l,
                MatchRule::Triggered => {
                    y & 1 == 1 && ((y ^ sig.word()) & sig.rest_mask()).count_ones() <= l
                }
            };
            if accept {
                total += p;
            }
        }
        total
    }

    fn brute_profile(sig: &Signature, probs: &BitProbs, rule: MatchRule) -> CorrProfile {
        let len = sig.len();
        let wrong = (1u64 << len) - 1;
        let mut h1 = vec![];
        let mut h0a = vec![];
        let mut h0b = vec![];
        for l in 0..=len {
            h1.push(brute_decision(sig, probs, sig.word(), l, rule));
            h0a.push(brute_decision(sig, probs, 0, l, rule));
            let s: f64 = (0..=mask(len))
                .filter(|&x| x != sig.word())
                .map(|x| brute_decision(sig, probs, x, l, rule))
                .sum();
            h0b.push(s / wrong as f64);
        }
        CorrProfile { h1, h0a, h0b }
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        for (k, (x, y)) in a.iter().zip(b).enumerate() {
            assert!((x - y).abs() <= tol, "index {k}: {x} vs {y}");
        }
    }

    #[test]
    fn profiles_match_enumeration() {
        for (sig, snr, lambda) in [
            ("10011010", 6.0, 0.5),
            ("10011010", 15.0, 0.3),
            ("1101", 3.0, 0.7),
            ("1000000", 10.0, 0.5),
            ("1111111", 10.0, 0.5),
            ("1011001110", 8.0, 0.45),
        ] {
            let sig: Signature = sig.parse().unwrap();
            let probs = BitProbs::new(lambda, &NoiseModel::from_snr_db(snr).unwrap());
            for rule in [MatchRule::Triggered, MatchRule::HammingBall] {
                let got = CorrProfile::new(&sig, &probs, rule);
                let want = brute_profile(&sig, &probs, rule);
                assert_close(&got.h1, &want.h1, 1e-12);
                assert_close(&got.h0a, &want.h0a, 1e-12);
                assert_close(&got.h0b, &want.h0b, 1e-12);
            }
        }
    }

    #[test]
    fn pattern_route_agrees() {
        let sig = default_sig();
        for snr in [0.0, 6.0, 15.0] {
            let probs = BitProbs::new(0.5, &NoiseModel::from_snr_db(snr).unwrap());
            for rule in [MatchRule::Triggered, MatchRule::HammingBall] {
                let direct = CorrProfile::new(&sig, &probs, rule).h0b;
                let other = h0b_profile_by_patterns(&sig, &probs, rule).unwrap();
                assert_close(&direct, &other, 1e-12);
            }
        }
    }

    #[test]
    fn count_sums() {
        for len in 1..=12u32 {
            for ones in 0..=len {
                let mut total = 0u128;
                for i in 0..=len - ones {
                    for j in 0..=ones {
                        total += wrong_sequence_count(len, ones, i, j).unwrap();
                    }
                }
                assert_eq!(total, 1u128 << len);

                // Enumerate every sequence against a reference with `ones` ones.
                let reference = mask(ones);
                let mut table = vec![vec![0u128; len as usize + 1]; len as usize + 1];
                for x in 0..(1u64 << len) {
                    let k = (x ^ reference).count_ones() as usize;
                    table[k][x.count_ones() as usize] += 1;
                }
                for k in 0..=len {
                    let mut row = 0;
                    for n in 0..=len {
                        let c = received_pattern_count(len, ones, k, n).unwrap();
                        assert_eq!(c, table[k as usize][n as usize], "L={len} d={ones} k={k} n={n}");
                        row += c;
                    }
                    assert_eq!(row, binomial(len, k).unwrap());
                }
            }
        }
    }

    #[test]
    fn wrong_count_example() {
        assert_eq!(wrong_sequence_count(8, 4, 1, 1).unwrap(), 16);
    }

    #[test]
    fn noiseless_limits() {
        let sig = default_sig();
        let n = NoiseModel::from_sigma(1e-9).unwrap();
        let p = DetectorParams::new(0.5, 0);
        assert!((corr_match_h1(&sig, &p, &n).unwrap() - 1.0).abs() < 1e-9);
        assert!(corr_match_h0a(&sig, &p, &n).unwrap() < 1e-12);
        assert!(corr_match_h0b(&sig, &p, &n).unwrap() < 1e-12);
    }

    #[test]
    fn exact_match_is_closed_product() {
        let sig = default_sig();
        for snr in [6.0, 15.0] {
            let n = NoiseModel::from_snr_db(snr).unwrap();
            let b = BitProbs::new(0.5, &n);
            let p = DetectorParams::new(0.5, 0);
            let h1 = corr_match_h1(&sig, &p, &n).unwrap();
            assert!((h1 - b.p1c.powi(4) * b.p0c.powi(4)).abs() < 1e-12);
            let h0a = corr_match_h0a(&sig, &p, &n).unwrap();
            assert!((h0a - b.e0().powi(4) * b.p0c.powi(4)).abs() < 1e-12);
        }
    }

    #[test]
    fn full_ball_accepts_everything() {
        let sig = default_sig();
        let n = NoiseModel::from_snr_db(4.0).unwrap();
        let probs = BitProbs::new(0.3, &n);
        let c = CorrProfile::new(&sig, &probs, MatchRule::HammingBall).at(8);
        assert_eq!((c.h1, c.h0a), (1.0, 1.0));
        assert!((c.h0b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vacuous_rest_reduces_to_trigger() {
        let sig = default_sig();
        for snr in [0.0, 6.0, 15.0] {
            let n = NoiseModel::from_snr_db(snr).unwrap();
            for lambda in [-0.5, 0.2, 0.5, 0.9, 1.4] {
                let t = super::super::energy::trigger_conditionals_uniform(&sig, lambda, &n);
                for l in [7, 8] {
                    let c = conditionals(&sig, &DetectorParams::new(lambda, l), &n, MatchRule::Triggered).unwrap();
                    assert!((c.h1 - t.h1).abs() < 1e-12);
                    assert!((c.h0a - t.h0a).abs() < 1e-12);
                    assert!((c.h0b - t.h0b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rejects_large_allowance() {
        let sig = default_sig();
        let n = NoiseModel::from_snr_db(10.0).unwrap();
        assert!(corr_match_h1(&sig, &DetectorParams::new(0.5, 9), &n).is_err());
    }

    proptest! {
        #[test]
        fn probabilities_in_range(
            len in 2u32..=16,
            word in any::<u64>(),
            lambda in -2.0f64..2.0,
            snr in 0.0f64..20.0,
        ) {
            let sig = Signature::from_word(word | 1, len).unwrap();
            let probs = BitProbs::new(lambda, &NoiseModel::from_snr_db(snr).unwrap());
            for rule in [MatchRule::Triggered, MatchRule::HammingBall] {
                let p = CorrProfile::new(&sig, &probs, rule);
                for v in p.h1.iter().chain(&p.h0a).chain(&p.h0b) {
                    prop_assert!((0.0..=1.0).contains(v));
                }
                for w in [&p.h1, &p.h0a, &p.h0b] {
                    prop_assert!(w.windows(2).all(|x| x[1] >= x[0] - 1e-15));
                }
            }
        }

    }
}
