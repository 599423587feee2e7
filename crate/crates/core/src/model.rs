//! Probability primitives and the shared channel model.
//!
//! The channel is unit-amplitude OOK over AWGN: a transmitted one arrives as
//! `1 + n`, a zero as `n`, with `n ~ N(0, sigma^2)` and `SNR = 1 / sigma^2`.
//! Every detector in [`crate::detectors`] is expressed through the per-bit
//! decode probabilities [`p1c`] and [`p0c`] defined here.

use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};

/// Upper-tail probability of the standard Gaussian, `Q(x) = P(N(0,1) > x)`.
///
/// Evaluated as `erfc(x / sqrt(2)) / 2`, which keeps full relative accuracy
/// deep into the upper tail where `1 - Phi(x)` would cancel.
pub fn q_function(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return domain(format!("Q-function argument must be finite, got {x}"));
    }
    Ok(q(x))
}

/// Unchecked Q-function; accepts infinities (`Q(+inf) = 0`, `Q(-inf) = 1`).
#[inline]
pub(crate) fn q(x: f64) -> f64 {
    0.5 * libm::erfc(x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Noise standard deviation for a unit-amplitude signal at `snr_db`.
pub fn sigma_from_snr_db(snr_db: f64) -> Result<f64> {
    if !snr_db.is_finite() {
        return domain(format!("SNR must be finite, got {snr_db}"));
    }
    Ok(10f64.powf(-snr_db / 20.0))
}

/// Probability that a transmitted one is decoded as one: `Q((lambda - 1) / sigma)`.
pub fn p1c(lambda: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    Ok(q((lambda - 1.0) / sigma))
}

/// Probability that a transmitted zero is decoded as zero: `1 - Q(lambda / sigma)`.
pub fn p0c(lambda: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    // Q(-x) = 1 - Q(x) keeps the small complement accurate for lambda > 0.
    Ok(q(-lambda / sigma))
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return domain(format!("sigma must be positive and finite, got {sigma}"));
    }
    Ok(())
}

/// AWGN channel strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    snr_db: f64,
    sigma: f64,
}

impl NoiseModel {
    pub fn from_snr_db(snr_db: f64) -> Result<Self> {
        let sigma = sigma_from_snr_db(snr_db)?;
        if sigma == 0.0 || !sigma.is_finite() {
            return domain(format!("SNR {snr_db} dB gives a degenerate sigma"));
        }
        Ok(Self { snr_db, sigma })
    }

    pub fn from_sigma(sigma: f64) -> Result<Self> {
        check_sigma(sigma)?;
        Ok(Self {
            snr_db: -20.0 * sigma.log10(),
            sigma,
        })
    }

    pub fn snr_db(&self) -> f64 {
        self.snr_db
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Per-bit decode probabilities at one threshold.
///
/// The complements are evaluated directly from the tail function so that a
/// small error rate keeps its relative accuracy next to a correct rate near 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BitProbs {
    /// P(decode 1 | sent 1)
    pub p1c: f64,
    /// P(decode 0 | sent 0)
    pub p0c: f64,
    e1: f64,
    e0: f64,
}

impl BitProbs {
    pub fn new(lambda: f64, noise: &NoiseModel) -> Self {
        let s = noise.sigma();
        Self {
            p1c: q((lambda - 1.0) / s),
            p0c: q(-lambda / s),
            e1: q((1.0 - lambda) / s),
            e0: q(lambda / s),
        }
    }

    /// P(decode 0 | sent 1)
    #[inline]
    pub fn e1(&self) -> f64 {
        self.e1
    }

    /// P(decode 1 | sent 0)
    #[inline]
    pub fn e0(&self) -> f64 {
        self.e0
    }
}

/// Hypothesis priors. `H0A`: nothing sent, `H0B`: a wrong sequence sent,
/// `H1`: the signature sent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Priors {
    p_h0a: f64,
    p_h0b: f64,
    p_h1: f64,
}

pub const PRIOR_SUM_TOL: f64 = 1e-12;

impl Priors {
    pub fn new(p_h0a: f64, p_h0b: f64, p_h1: f64) -> Result<Self> {
        for (name, p) in [("P(H0A)", p_h0a), ("P(H0B)", p_h0b), ("P(H1)", p_h1)] {
            if !(0.0..=1.0).contains(&p) {
                return domain(format!("{name} = {p} is not a probability"));
            }
        }
        let sum = p_h0a + p_h0b + p_h1;
        if (sum - 1.0).abs() > PRIOR_SUM_TOL {
            return domain(format!("priors sum to {sum}, expected 1"));
        }
        Ok(Self { p_h0a, p_h0b, p_h1 })
    }

    /// Traffic model where the channel is busy a fraction `utilization` of the
    /// time and every one of the `2^len` sequences is equally likely.
    pub fn utilization(utilization: f64, len: u32) -> Result<Self> {
        if !(0.0..=1.0).contains(&utilization) {
            return domain(format!("utilization {utilization} outside [0, 1]"));
        }
        if len == 0 || len > 64 {
            return domain(format!("sequence length {len} outside 1..=64"));
        }
        let n = 2f64.powi(len as i32);
        let p_h1 = utilization / n;
        let p_h0b = utilization - p_h1;
        Self::new(1.0 - utilization, p_h0b, p_h1)
    }

    pub fn h0a(&self) -> f64 {
        self.p_h0a
    }

    pub fn h0b(&self) -> f64 {
        self.p_h0b
    }

    pub fn h1(&self) -> f64 {
        self.p_h1
    }

    /// Total null-hypothesis mass `P(H0A) + P(H0B)`.
    pub fn h0(&self) -> f64 {
        self.p_h0a + self.p_h0b
    }

    /// Conditional weights of H0A and H0B given H0.
    pub fn h0_weights(&self) -> Result<(f64, f64)> {
        let h0 = self.h0();
        if h0 <= 0.0 {
            return domain("priors put zero mass on H0; P_FA is undefined");
        }
        Ok((self.p_h0a / h0, self.p_h0b / h0))
    }
}

impl Default for Priors {
    /// 10% utilization with 256 equally likely 8-bit sequences.
    fn default() -> Self {
        Self {
            p_h0a: 0.9,
            p_h0b: 0.1 * 255.0 / 256.0,
            p_h1: 0.1 / 256.0,
        }
    }
}

/// Target bit pattern. Bit 0 of `word` is the first transmitted bit, which
/// must be a one: it is the bit that triggers the receiver.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature {
    word: u64,
    len: u32,
}

pub const MAX_LEN: u32 = 64;

impl Signature {
    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let len = bits.len() as u32;
        if len == 0 || len > MAX_LEN {
            return domain(format!("signature length {len} outside 1..={MAX_LEN}"));
        }
        if !bits[0] {
            return domain("the first signature bit must be 1 (trigger bit)");
        }
        let word = bits
            .iter()
            .enumerate()
            .fold(0u64, |w, (i, &b)| w | ((b as u64) << i));
        Ok(Self { word, len })
    }

    /// Builds a signature from its first `len` bits stored LSB-first in `word`.
    pub fn from_word(word: u64, len: u32) -> Result<Self> {
        if len == 0 || len > MAX_LEN {
            return domain(format!("signature length {len} outside 1..={MAX_LEN}"));
        }
        let word = word & mask(len);
        if word & 1 == 0 {
            return domain("the first signature bit must be 1 (trigger bit)");
        }
        Ok(Self { word, len })
    }

    /// Default analysis signature of length `len` with `len / 2` ones,
    /// built by repeating the `10011010` pattern.
    pub fn balanced(len: u32) -> Result<Self> {
        const PATTERN: [bool; 8] = [true, false, false, true, true, false, true, false];
        if !(2..=MAX_LEN).contains(&len) {
            return domain(format!("balanced signature needs 2..={MAX_LEN} bits"));
        }
        let mut bits: Vec<bool> = (0..len as usize).map(|i| PATTERN[i % 8]).collect();
        // Fix up the ones-count for lengths that cut the pattern unevenly.
        let target = len as usize / 2;
        let mut ones = bits.iter().filter(|&&b| b).count();
        for b in bits.iter_mut().skip(1).rev() {
            if ones == target {
                break;
            }
            if ones < target && !*b {
                *b = true;
                ones += 1;
            } else if ones > target && *b {
                *b = false;
                ones -= 1;
            }
        }
        Self::from_bits(&bits)
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of ones.
    pub fn ones(&self) -> u32 {
        self.word.count_ones()
    }

    pub fn word(&self) -> u64 {
        self.word
    }

    /// Bit `i`, zero-based (`bit(0)` is the trigger bit).
    pub fn bit(&self, i: u32) -> bool {
        (self.word >> i) & 1 == 1
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.bit(i))
    }

    /// Mask covering every bit of the sequence.
    pub fn full_mask(&self) -> u64 {
        mask(self.len)
    }

    /// Mask covering bits `1..len`, i.e. everything except the trigger bit.
    pub fn rest_mask(&self) -> u64 {
        mask(self.len) & !1
    }
}

pub(crate) fn mask(len: u32) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Signature({self})")
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Signature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Domain(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_bits(&bits)
    }
}

/// Decision knobs: threshold on the normalized channel and the number of
/// mismatches the correlator tolerates. Matched filters read `lambda` as the
/// threshold on their statistic and ignore `l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams {
    pub lambda: f64,
    pub l: u32,
}

impl DetectorParams {
    pub fn new(lambda: f64, l: u32) -> Self {
        Self { lambda, l }
    }

    pub(crate) fn check_for(&self, sig: &Signature) -> Result<()> {
        if self.l > sig.len() {
            return domain(format!(
                "mismatch allowance l = {} exceeds sequence length {}",
                self.l,
                sig.len()
            ));
        }
        if self.lambda.is_nan() {
            return domain("threshold is NaN");
        }
        Ok(())
    }
}

/// Exact binomial coefficient.
pub fn binomial(n: u32, k: u32) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = acc
            .checked_mul((n - i) as u128)
            .ok_or(Error::Overflow { n, k })?
            / (i + 1) as u128;
    }
    Ok(acc)
}

/// Binomial coefficient as a float, for `n <= 64` where it is exact in u128.
pub(crate) fn binom(n: u32, k: u32) -> f64 {
    binomial(n, k).expect("binomial within the supported sequence length") as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Gauss-Legendre quadrature of the standard normal density on
    /// `[x, x + 40]`; the truncated tail beyond is below 1e-300.
    fn q_quadrature(x: f64) -> f64 {
        const NODES: [f64; 5] = [
            0.0,
            -0.538_469_310_105_683_1,
            0.538_469_310_105_683_1,
            -0.906_179_845_938_664,
            0.906_179_845_938_664,
        ];
        const WEIGHTS: [f64; 5] = [
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_5,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_1,
            0.236_926_885_056_189_1,
        ];
        let panels = 4000;
        let h = 40.0 / panels as f64;
        let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut sum = 0.0;
        for p in 0..panels {
            let mid = x + (p as f64 + 0.5) * h;
            for (n, w) in NODES.iter().zip(WEIGHTS) {
                sum += w * pdf(mid + 0.5 * h * n);
            }
        }
        sum * 0.5 * h
    }

    #[test]
    fn q_at_zero_is_half() {
        assert_eq!(q_function(0.0).unwrap(), 0.5);
    }

    #[test]
    fn q_far_tail_vanishes() {
        for x in [40.0, 50.0, 1e3] {
            assert!(q_function(x).unwrap() <= 1e-300);
        }
    }

    #[test]
    fn q_rejects_non_finite() {
        assert!(q_function(f64::NAN).is_err());
        assert!(q_function(f64::INFINITY).is_err());
    }

    #[test]
    fn q_matches_quadrature() {
        for x in [2.8117, -1.0, 0.3, 0.99763, 4.5, 7.9] {
            let exact = q_quadrature(x);
            let got = q_function(x).unwrap();
            assert!((got - exact).abs() <= 1e-10, "x={x}: {got} vs {exact}");
            assert!(((got - exact) / exact).abs() <= 1e-11, "x={x} relative");
        }
    }

    #[test]
    fn q_symmetry() {
        for x in [0.1, 1.0, 2.5, 5.0] {
            let s = q_function(x).unwrap() + q_function(-x).unwrap();
            assert!((s - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma_from_snr_db(0.0).unwrap(), 1.0);
        assert!((sigma_from_snr_db(6.0).unwrap() - 0.501_187_233_627_272_3).abs() < 1e-15);
        assert!((sigma_from_snr_db(15.0).unwrap() - 0.177_827_941_003_892_3).abs() < 1e-15);
        assert!(sigma_from_snr_db(f64::NAN).is_err());
    }

    #[test]
    fn bit_probability_examples() {
        assert_eq!(p1c(1.0, 0.3).unwrap(), 0.5);
        assert_eq!(p0c(0.0, 0.3).unwrap(), 0.5);

        let s15 = sigma_from_snr_db(15.0).unwrap();
        let expect = 1.0 - q_quadrature(0.5 / s15);
        assert!((p1c(0.5, s15).unwrap() - expect).abs() < 1e-6);
        assert!((p1c(0.5, s15).unwrap() - 0.997_54).abs() < 5e-6);

        let s6 = sigma_from_snr_db(6.0).unwrap();
        let expect = 1.0 - q_quadrature(0.5 / s6);
        assert!((p0c(0.5, s6).unwrap() - expect).abs() < 1e-6);

        assert!((p1c(0.5, 1e-9).unwrap() - 1.0).abs() < 1e-12);
        assert!((p0c(0.5, 1e-9).unwrap() - 1.0).abs() < 1e-12);

        assert!(p1c(0.5, 0.0).is_err());
        assert!(p0c(0.5, -1.0).is_err());
    }

    #[test]
    fn priors_validation() {
        let d = Priors::default();
        assert!((d.h0a() + d.h0b() + d.h1() - 1.0).abs() < 1e-15);
        assert!(Priors::new(0.5, 0.5, 0.1).is_err());
        assert!(Priors::new(-0.1, 1.0, 0.1).is_err());
        assert!(Priors::new(0.0, 0.0, 1.0).unwrap().h0_weights().is_err());
        let u = Priors::utilization(0.1, 8).unwrap();
        assert!((u.h1() - d.h1()).abs() < 1e-18);
        assert!((u.h0b() - d.h0b()).abs() < 1e-15);
    }

    #[test]
    fn signature_parsing() {
        let s: Signature = "10011010".parse().unwrap();
        assert_eq!(s.len(), 8);
        assert_eq!(s.ones(), 4);
        assert!(s.bit(0) && !s.bit(1) && s.bit(3));
        assert_eq!(s.to_string(), "10011010");
        assert!("0101".parse::<Signature>().is_err());
        assert!("".parse::<Signature>().is_err());
        assert!("10x1".parse::<Signature>().is_err());
        assert!(Signature::from_bits(&[true; 65]).is_err());
    }

    #[test]
    fn balanced_signatures() {
        for len in [2, 4, 5, 8, 16, 31, 32, 64] {
            let s = Signature::balanced(len).unwrap();
            assert_eq!(s.len(), len);
            assert_eq!(s.ones(), len / 2, "len {len}");
            assert!(s.bit(0));
        }
        assert_eq!(Signature::balanced(8).unwrap().to_string(), "10011010");
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(8, 4).unwrap(), 70);
        assert_eq!(binomial(64, 32).unwrap(), 1_832_624_140_942_590_534);
        assert_eq!(binomial(3, 5).unwrap(), 0);
        assert!(binomial(200, 100).is_err());
    }

    #[test]
    fn params_range() {
        let sig = Signature::balanced(8).unwrap();
        assert!(DetectorParams::new(0.5, 8).check_for(&sig).is_ok());
        assert!(DetectorParams::new(0.5, 9).check_for(&sig).is_err());
    }
}
