//! Closed-form detection and false-alarm probabilities.
//!
//! Each detector reports [`Conditionals`]: the probability of declaring H1
//! under each of the three hypotheses. Priors turn those into a
//! [`DetectionStats`] pair.

pub mod correlator;
pub mod energy;
pub mod matched;

use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};
use crate::model::{DetectorParams, NoiseModel, Priors, Signature};

pub use correlator::{CorrProfile, MatchRule};

/// The four receiver architectures under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DetectorKind {
    Ed,
    Corr,
    OokMf,
    BpskMf,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 4] = [Self::Ed, Self::Corr, Self::OokMf, Self::BpskMf];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Ed => "ed",
            Self::Corr => "corr",
            Self::OokMf => "ook_mf",
            Self::BpskMf => "bpsk_mf",
        }
    }

    /// H0B traffic the closed form is derived for.
    ///
    /// The energy-detector false-alarm formula charges every wrong sequence
    /// with `P1C`, i.e. it assumes wrong sequences carry the trigger bit; the
    /// other detectors average over all `2^L - 1` wrong sequences.
    pub fn h0b_model(&self) -> H0bModel {
        match self {
            Self::Ed => H0bModel::TriggerBearing,
            _ => H0bModel::Uniform,
        }
    }

    /// Default threshold sweep: `[-2, 2]` for threshold-on-sample detectors,
    /// `[-1.25 L, 1.25 L]` for matched filters.
    pub fn lambda_range(&self, len: u32) -> (f64, f64) {
        match self {
            Self::Ed | Self::Corr => (-2.0, 2.0),
            Self::OokMf | Self::BpskMf => (-1.25 * len as f64, 1.25 * len as f64),
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "ed" => Ok(Self::Ed),
            "corr" => Ok(Self::Corr),
            "ook_mf" | "mf" => Ok(Self::OokMf),
            "bpsk_mf" => Ok(Self::BpskMf),
            other => Err(Error::Domain(format!("unknown detector {other:?}"))),
        }
    }
}

/// Distribution of wrong sequences under H0B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum H0bModel {
    /// Uniform over the `2^L - 1` sequences other than the signature.
    Uniform,
    /// Uniform over the `2^(L-1) - 1` wrong sequences whose first bit is one.
    TriggerBearing,
}

/// P(declare H1 | hypothesis) for each hypothesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conditionals {
    pub h1: f64,
    pub h0a: f64,
    pub h0b: f64,
}

impl Conditionals {
    pub fn stats(&self, priors: &Priors) -> Result<DetectionStats> {
        let (wa, wb) = priors.h0_weights()?;
        DetectionStats::new(wa * self.h0a + wb * self.h0b, self.h1)
    }
}

/// A (P_FA, P_D) operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionStats {
    pub p_fa: f64,
    pub p_d: f64,
}

impl DetectionStats {
    pub fn new(p_fa: f64, p_d: f64) -> Result<Self> {
        // Sums of many tail terms can overshoot 1 by an ulp.
        const SLACK: f64 = 1e-12;
        for (name, p) in [("P_FA", p_fa), ("P_D", p_d)] {
            if !(-SLACK..=1.0 + SLACK).contains(&p) {
                return domain(format!("{name} = {p} is not a probability"));
            }
        }
        Ok(Self {
            p_fa: p_fa.clamp(0.0, 1.0),
            p_d: p_d.clamp(0.0, 1.0),
        })
    }
}

/// Conditionals of `kind` at one parameter point. The energy detector uses its
/// closed form (see [`DetectorKind::h0b_model`]); the correlator the triggered
/// rule.
pub fn conditionals(
    kind: DetectorKind,
    sig: &Signature,
    params: &DetectorParams,
    noise: &NoiseModel,
) -> Result<Conditionals> {
    match kind {
        DetectorKind::Ed => Ok(energy::ed_conditionals(params.lambda, noise)),
        DetectorKind::Corr => correlator::conditionals(sig, params, noise, MatchRule::Triggered),
        DetectorKind::OokMf => matched::ook_conditionals(sig, params.lambda, noise),
        DetectorKind::BpskMf => matched::bpsk_conditionals(sig.len(), params.lambda, noise),
    }
}

pub fn stats(
    kind: DetectorKind,
    sig: &Signature,
    params: &DetectorParams,
    noise: &NoiseModel,
    priors: &Priors,
) -> Result<DetectionStats> {
    conditionals(kind, sig, params, noise)?.stats(priors)
}

/// Two-phase system figures from the component operating points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPhaseStats {
    /// `P(H0) * P_FA^ED * P_FA^Corr`, the product form that treats the two
    /// stages' false alarms as independent.
    pub p_fa_product: f64,
    /// `E^ED + (P(H0) P_FA^ED + P(H1) P_D^ED) E_Corr`
    pub e_wurx: f64,
}

pub fn two_phase_system_stats(
    ed: &DetectionStats,
    corr: &DetectionStats,
    priors: &Priors,
    e_ed: f64,
    e_corr: f64,
) -> TwoPhaseStats {
    let activation = priors.h0() * ed.p_fa + priors.h1() * ed.p_d;
    TwoPhaseStats {
        p_fa_product: priors.h0() * ed.p_fa * corr.p_fa,
        e_wurx: e_ed + activation * e_corr,
    }
}
