//! Seeded simulation of the three hypotheses through the AWGN channel and the
//! exact decision rules.
//!
//! Trial `t` of a run draws from its own ChaCha8 stream keyed by
//! `(seed, hypothesis, t)`, so a trial's outcome does not depend on how the
//! trials are split across threads. Counts are summed, never floats.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::detectors::{DetectorKind, H0bModel, MatchRule};
use crate::error::{domain, Result};
use crate::model::{mask, DetectorParams, NoiseModel, Priors, Signature};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    H0A,
    H0B,
    H1,
}

impl Hypothesis {
    pub const ALL: [Hypothesis; 3] = [Self::H0A, Self::H0B, Self::H1];

    fn tag(self) -> u64 {
        match self {
            Self::H0A => 1,
            Self::H0B => 2,
            Self::H1 => 3,
        }
    }
}

/// Stream tags for per-trial generators outside the three hypotheses.
pub(crate) mod stream {
    pub const CASCADE: u64 = 4;
    pub const PACKET: u64 = 5;
    pub const INTERFERER: u64 = 6;
}

/// Generator for trial `index` of the run tagged `tag` under `seed`.
pub(crate) fn trial_rng(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((tag << 48) | (index & mask(48)));
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialPlan {
    pub n_trials: u64,
    pub seed: u64,
    pub hypothesis: Hypothesis,
}

impl TrialPlan {
    pub fn new(n_trials: u64, seed: u64, hypothesis: Hypothesis) -> Result<Self> {
        if n_trials == 0 {
            return domain("a plan needs at least one trial");
        }
        if n_trials > 1 << 48 {
            return domain("at most 2^48 trials per plan");
        }
        Ok(Self {
            n_trials,
            seed,
            hypothesis,
        })
    }

    pub fn with_hypothesis(&self, hypothesis: Hypothesis) -> Self {
        Self { hypothesis, ..*self }
    }
}

/// Binomial proportion estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub p_hat: f64,
    pub std_err: f64,
    pub n: u64,
    pub hits: u64,
}

impl Estimate {
    pub fn from_counts(hits: u64, n: u64) -> Self {
        let p = hits as f64 / n as f64;
        Self {
            p_hat: p,
            std_err: (p * (1.0 - p) / n as f64).sqrt(),
            n,
            hits,
        }
    }

    /// Whether `p` is within `k` standard errors of this estimate, the standard
    /// error taken under `p` itself so that rare events are not judged against
    /// a zero-width band, plus an absolute slack of `1e-9`.
    pub fn agrees_with(&self, p: f64, k: f64) -> bool {
        let se = (p * (1.0 - p) / self.n as f64).max(0.0).sqrt();
        (self.p_hat - p).abs() <= k * se + 1e-9
    }
}

/// How the simulation draws wrong sequences and applies the correlator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub rule: MatchRule,
    pub h0b: H0bModel,
}

impl SimConfig {
    /// The configuration each closed form in `detectors` is derived under.
    pub fn for_kind(kind: DetectorKind) -> Self {
        Self {
            rule: MatchRule::Triggered,
            h0b: kind.h0b_model(),
        }
    }
}

/// Transmitted sequence as an LSB-first word.
pub fn gen_transmitted<R: Rng + ?Sized>(
    hypothesis: Hypothesis,
    sig: &Signature,
    h0b: H0bModel,
    rng: &mut R,
) -> u64 {
    match hypothesis {
        Hypothesis::H1 => sig.word(),
        Hypothesis::H0A => 0,
        Hypothesis::H0B => loop {
            let mut x = rng.random::<u64>() & sig.full_mask();
            if h0b == H0bModel::TriggerBearing {
                x |= 1;
            }
            if x != sig.word() {
                break x;
            }
        },
    }
}

/// Channel amplitudes for `x`. OOK keys the carrier on and off; BPSK sends
/// `+1/-1`. Under H0A nothing is sent whatever the modulation.
pub fn symbols(kind: DetectorKind, hypothesis: Hypothesis, x: u64, len: u32) -> Vec<f64> {
    let mut out = vec![0.0; len as usize];
    fill_symbols(kind, hypothesis, x, &mut out);
    out
}

fn fill_symbols(kind: DetectorKind, hypothesis: Hypothesis, x: u64, out: &mut [f64]) {
    for (k, v) in out.iter_mut().enumerate() {
        let bit = (x >> k) & 1 == 1;
        *v = match (hypothesis, kind) {
            (Hypothesis::H0A, _) => 0.0,
            (_, DetectorKind::BpskMf) => {
                if bit {
                    1.0
                } else {
                    -1.0
                }
            }
            _ => bit as u8 as f64,
        };
    }
}

/// `z = x + n` with `n ~ N(0, sigma^2)` i.i.d.
pub fn add_awgn<R: Rng + ?Sized>(x: &[f64], noise: &NoiseModel, rng: &mut R) -> Vec<f64> {
    let mut z = x.to_vec();
    add_noise_in_place(&mut z, noise.sigma(), rng);
    z
}

fn add_noise_in_place<R: Rng + ?Sized>(z: &mut [f64], sigma: f64, rng: &mut R) {
    for v in z.iter_mut() {
        let n: f64 = rng.sample(StandardNormal);
        *v += sigma * n;
    }
}

/// Thresholded sequence, `z[k] > lambda` as a one.
pub fn threshold_word(z: &[f64], lambda: f64) -> u64 {
    z.iter()
        .enumerate()
        .fold(0, |w, (k, &v)| w | (((v > lambda) as u64) << k))
}

/// Whether `kind` declares H1 on `z`; the correlator uses the triggered rule.
pub fn decide(kind: DetectorKind, z: &[f64], sig: &Signature, params: &DetectorParams) -> bool {
    decide_with(kind, MatchRule::Triggered, z, sig, params)
}

pub fn decide_with(
    kind: DetectorKind,
    rule: MatchRule,
    z: &[f64],
    sig: &Signature,
    params: &DetectorParams,
) -> bool {
    let lambda = params.lambda;
    match kind {
        DetectorKind::Ed => z[0] > lambda,
        DetectorKind::Corr => {
            let y = threshold_word(z, lambda);
            correlator_accepts(y, sig, params.l, rule)
        }
        DetectorKind::OokMf => {
            let eta: f64 = z
                .iter()
                .enumerate()
                .filter(|&(k, _)| sig.bit(k as u32))
                .map(|(_, v)| v)
                .sum();
            eta > lambda
        }
        DetectorKind::BpskMf => {
            let eta: f64 = z
                .iter()
                .enumerate()
                .map(|(k, v)| if sig.bit(k as u32) { *v } else { -*v })
                .sum();
            eta > lambda
        }
    }
}

pub(crate) fn correlator_accepts(y: u64, sig: &Signature, l: u32, rule: MatchRule) -> bool {
    match rule {
        MatchRule::Triggered => y & 1 == 1 && ((y ^ sig.word()) & sig.rest_mask()).count_ones() <= l,
        MatchRule::HammingBall => ((y ^ sig.word()) & sig.full_mask()).count_ones() <= l,
    }
}

pub fn estimate(
    kind: DetectorKind,
    sig: &Signature,
    params: &DetectorParams,
    noise: &NoiseModel,
    plan: &TrialPlan,
) -> Result<Estimate> {
    estimate_with(kind, SimConfig::for_kind(kind), sig, params, noise, plan)
}

pub fn estimate_with(
    kind: DetectorKind,
    cfg: SimConfig,
    sig: &Signature,
    params: &DetectorParams,
    noise: &NoiseModel,
    plan: &TrialPlan,
) -> Result<Estimate> {
    Ok(estimate_grid(kind, cfg, sig, std::slice::from_ref(params), noise, plan)?[0])
}

/// Estimates at every parameter point from one set of trials, so the points
/// share their noise realisations.
pub fn estimate_grid(
    kind: DetectorKind,
    cfg: SimConfig,
    sig: &Signature,
    grid: &[DetectorParams],
    noise: &NoiseModel,
    plan: &TrialPlan,
) -> Result<Vec<Estimate>> {
    for p in grid {
        p.check_for(sig)?;
    }
    let len = sig.len() as usize;
    let sigma = noise.sigma();
    let counts = (0..plan.n_trials)
        .into_par_iter()
        .fold(
            || (vec![0u64; grid.len()], vec![0.0; len]),
            |(mut hits, mut z), t| {
                let mut rng = trial_rng(plan.seed, plan.hypothesis.tag(), t);
                let x = gen_transmitted(plan.hypothesis, sig, cfg.h0b, &mut rng);
                fill_symbols(kind, plan.hypothesis, x, &mut z);
                add_noise_in_place(&mut z, sigma, &mut rng);
                for (h, p) in hits.iter_mut().zip(grid) {
                    *h += decide_with(kind, cfg.rule, &z, sig, p) as u64;
                }
                (hits, z)
            },
        )
        .map(|(hits, _)| hits)
        .reduce(
            || vec![0u64; grid.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(counts
        .into_iter()
        .map(|h| Estimate::from_counts(h, plan.n_trials))
        .collect())
}

/// Simulated (P_FA, P_D) of one detector: `plan.n_trials` trials per hypothesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimStats {
    pub h0a: Estimate,
    pub h0b: Estimate,
    pub h1: Estimate,
    w_a: f64,
    w_b: f64,
}

impl SimStats {
    pub fn p_d(&self) -> f64 {
        self.h1.p_hat
    }

    pub fn p_fa(&self) -> f64 {
        self.w_a * self.h0a.p_hat + self.w_b * self.h0b.p_hat
    }

    /// Standard error of [`Self::p_fa`] with each component's variance taken
    /// at the given conditional rates.
    pub fn p_fa_std_err(&self, p_h0a: f64, p_h0b: f64) -> f64 {
        let var = |p: f64, n: u64| p * (1.0 - p) / n as f64;
        (self.w_a.powi(2) * var(p_h0a, self.h0a.n) + self.w_b.powi(2) * var(p_h0b, self.h0b.n)).sqrt()
    }
}

/// All three hypotheses over a grid; `plan.hypothesis` is ignored.
pub fn simulate_grid(
    kind: DetectorKind,
    cfg: SimConfig,
    sig: &Signature,
    grid: &[DetectorParams],
    noise: &NoiseModel,
    priors: &Priors,
    plan: &TrialPlan,
) -> Result<Vec<SimStats>> {
    let (w_a, w_b) = priors.h0_weights()?;
    let run = |h| estimate_grid(kind, cfg, sig, grid, noise, &plan.with_hypothesis(h));
    let (a, b, c) = (run(Hypothesis::H0A)?, run(Hypothesis::H0B)?, run(Hypothesis::H1)?);
    Ok((0..grid.len())
        .map(|i| SimStats {
            h0a: a[i],
            h0b: b[i],
            h1: c[i],
            w_a,
            w_b,
        })
        .collect())
}

/// Result of simulating the literal two-phase pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeEstimate {
    /// P(declare H1 | H0), from the H0A and H0B trials weighted by the priors.
    pub p_fa: f64,
    pub p_d: Estimate,
    /// Fraction of all trials, hypotheses drawn from the priors, in which the
    /// first phase woke the second.
    pub activation: Estimate,
    /// `P(H0) * p_fa`, the quantity the product formula approximates.
    pub p_fa_joint: f64,
    /// `P(H0) * P_FA^ED * P_FA^Corr` from the closed forms.
    pub p_fa_product: f64,
    /// `p_fa_joint - p_fa_product`
    pub discrepancy: f64,
}

/// Phase 1 thresholds `z[1]` at the energy detector's `lambda`; only when it
/// fires does the correlator see the sequence. Wrong sequences are uniform.
pub fn estimate_cascade(
    ed: &DetectorParams,
    corr: &DetectorParams,
    sig: &Signature,
    noise: &NoiseModel,
    priors: &Priors,
    plan: &TrialPlan,
) -> Result<CascadeEstimate> {
    corr.check_for(sig)?;
    if ed.lambda.is_nan() {
        return domain("threshold is NaN");
    }
    let len = sig.len() as usize;
    let sigma = noise.sigma();
    let cascade = |h: Hypothesis, rng: &mut ChaCha8Rng, z: &mut [f64]| -> (bool, bool) {
        let x = gen_transmitted(h, sig, H0bModel::Uniform, rng);
        fill_symbols(DetectorKind::Corr, h, x, z);
        add_noise_in_place(z, sigma, rng);
        let woke = z[0] > ed.lambda;
        let declared = woke && correlator_accepts(threshold_word(z, corr.lambda), sig, corr.l, MatchRule::Triggered);
        (woke, declared)
    };

    let count = |h: Hypothesis| -> u64 {
        (0..plan.n_trials)
            .into_par_iter()
            .map_init(
                || vec![0.0; len],
                |z, t| {
                    let mut rng = trial_rng(plan.seed, h.tag(), t);
                    cascade(h, &mut rng, z).1 as u64
                },
            )
            .sum()
    };
    let (w_a, w_b) = priors.h0_weights()?;
    let p_a = count(Hypothesis::H0A) as f64 / plan.n_trials as f64;
    let p_b = count(Hypothesis::H0B) as f64 / plan.n_trials as f64;
    let p_fa = w_a * p_a + w_b * p_b;
    let p_d = Estimate::from_counts(count(Hypothesis::H1), plan.n_trials);

    let woke: u64 = (0..plan.n_trials)
        .into_par_iter()
        .map_init(
            || vec![0.0; len],
            |z, t| {
                let mut rng = trial_rng(plan.seed, stream::CASCADE, t);
                let u: f64 = rng.random();
                let h = if u < priors.h1() {
                    Hypothesis::H1
                } else if u < priors.h1() + priors.h0b() {
                    Hypothesis::H0B
                } else {
                    Hypothesis::H0A
                };
                cascade(h, &mut rng, z).0 as u64
            },
        )
        .sum();

    let ed_fa = crate::detectors::energy::ed_pfa(ed.lambda, noise, priors)?;
    let corr_fa = crate::detectors::correlator::corr_stats(sig, corr, noise, priors)?.p_fa;
    let p_fa_product = priors.h0() * ed_fa * corr_fa;
    let p_fa_joint = priors.h0() * p_fa;
    Ok(CascadeEstimate {
        p_fa,
        p_d,
        activation: Estimate::from_counts(woke, plan.n_trials),
        p_fa_joint,
        p_fa_product,
        discrepancy: p_fa_joint - p_fa_product,
    })
}
