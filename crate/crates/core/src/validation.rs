//! Analytic-versus-simulation agreement matrix and exact enumeration checks,
//! shared by the `validate` command and the acceptance tests.

use crate::analysis::linspace;
use crate::detectors::correlator::{CorrProfile, MatchRule};
use crate::detectors::energy::trigger_conditionals_uniform;
use crate::detectors::{self, Conditionals, DetectorKind};
use crate::error::Result;
use crate::model::{binom, BitProbs, DetectorParams, NoiseModel, Priors, Signature};
use crate::monte_carlo::{correlator_accepts, simulate_grid, Hypothesis, SimConfig, TrialPlan};

/// Deliberate defect injected on the analytic side, to show the checks bite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// Correlator exact-match wrong-sequence probability from the
    /// [`duplicated_factor_kernel`].
    DuplicatedKernel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationConfig {
    pub trials: u64,
    pub seed: u64,
    pub snrs_db: Vec<f64>,
    pub signature: Signature,
    pub priors: Priors,
    /// Thresholds per detector; the matched filters scale these fractions of
    /// their noiseless range.
    pub fractions: Vec<f64>,
    pub fault: Fault,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            trials: 100_000,
            seed: 0,
            snrs_db: vec![6.0, 10.0, 15.0],
            signature: "10011010".parse().expect("valid signature"),
            priors: Priors::default(),
            fractions: linspace(0.1, 0.9, 9),
            fault: Fault::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    /// Observed discrepancy over the allowed one; the check passes at `<= 1`.
    pub margin: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.margin <= 1.0
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn worst(&self) -> Option<&Check> {
        self.checks.iter().max_by(|a, b| a.margin.total_cmp(&b.margin))
    }
}

/// Statistic thresholds for `kind` at the given fractions.
pub fn grid_for(kind: DetectorKind, sig: &Signature, fractions: &[f64]) -> Vec<DetectorParams> {
    match kind {
        DetectorKind::Ed => fractions.iter().map(|&f| DetectorParams::new(f, 0)).collect(),
        DetectorKind::Corr => (0..=sig.len())
            .flat_map(|l| fractions.iter().map(move |&f| DetectorParams::new(f, l)))
            .collect(),
        DetectorKind::OokMf => fractions
            .iter()
            .map(|&f| DetectorParams::new(f * sig.ones() as f64, 0))
            .collect(),
        DetectorKind::BpskMf => fractions
            .iter()
            .map(|&f| DetectorParams::new((2.0 * f - 1.0) * sig.len() as f64, 0))
            .collect(),
    }
}

fn analytic(kind: DetectorKind, cfg: &ValidationConfig, p: &DetectorParams, noise: &NoiseModel) -> Result<Conditionals> {
    let mut c = detectors::conditionals(kind, &cfg.signature, p, noise)?;
    if cfg.fault == Fault::DuplicatedKernel && kind == DetectorKind::Corr && p.l == 0 {
        c.h0b = duplicated_factor_kernel(&cfg.signature, &BitProbs::new(p.lambda, noise));
    }
    Ok(c)
}

/// Every detector, SNR and grid point: simulated P_FA and P_D within three
/// standard errors (taken at the analytic rates) plus `1e-9`.
pub fn agreement_matrix(cfg: &ValidationConfig) -> Result<Report> {
    let mut report = Report::default();
    let plan = TrialPlan::new(cfg.trials, cfg.seed, Hypothesis::H1)?;
    for kind in DetectorKind::ALL {
        let grid = grid_for(kind, &cfg.signature, &cfg.fractions);
        for &snr in &cfg.snrs_db {
            let noise = NoiseModel::from_snr_db(snr)?;
            let sims = simulate_grid(kind, SimConfig::for_kind(kind), &cfg.signature, &grid, &noise, &cfg.priors, &plan)?;
            for (p, sim) in grid.iter().zip(&sims) {
                let c = analytic(kind, cfg, p, &noise)?;
                let s = c.stats(&cfg.priors)?;
                let n = cfg.trials as f64;
                let band_d = 3.0 * (s.p_d * (1.0 - s.p_d) / n).sqrt() + 1e-9;
                let band_fa = 3.0 * sim.p_fa_std_err(c.h0a, c.h0b) + 1e-9;
                let tag = format!("{kind} snr={snr} lambda={} l={}", p.lambda, p.l);
                report.checks.push(Check { name: format!("mc p_d {tag}"), margin: (sim.p_d() - s.p_d).abs() / band_d });
                report.checks.push(Check { name: format!("mc p_fa {tag}"), margin: (sim.p_fa() - s.p_fa).abs() / band_fa });
            }
        }
    }
    Ok(report)
}

/// Exact conditionals of the correlator by summing over every transmitted
/// wrong sequence and every received pattern. Cost `4^L`.
pub fn enumerate_correlator(sig: &Signature, probs: &BitProbs, rule: MatchRule, l: u32) -> Conditionals {
    let len = sig.len();
    let n = 1u64 << len;
    let p_rx = |x: u64, y: u64| -> f64 {
        (0..len)
            .map(|b| match (x >> b & 1, y >> b & 1) {
                (1, 1) => probs.p1c,
                (1, _) => probs.e1(),
                (_, 0) => probs.p0c,
                _ => probs.e0(),
            })
            .product()
    };
    let accept: Vec<bool> = (0..n).map(|y| correlator_accepts(y, sig, l, rule)).collect();
    let given = |x: u64| -> f64 { (0..n).filter(|&y| accept[y as usize]).map(|y| p_rx(x, y)).sum() };
    let wrong: f64 = (0..n).filter(|&x| x != sig.word()).map(given).sum();
    Conditionals { h1: given(sig.word()), h0a: given(0), h0b: wrong / (n - 1) as f64 }
}

/// Exact-match wrong-sequence probability from a kernel that repeats the
/// `(1 - P1C)^i P0C^(L-d-i)` pair in place of the factors for the signature's
/// ones. Not a probability over the four position classes; kept as the
/// negative control.
pub fn duplicated_factor_kernel(sig: &Signature, probs: &BitProbs) -> f64 {
    let (len, d) = (sig.len(), sig.ones());
    let (p1c, p0c) = (probs.p1c, probs.p0c);
    let mut acc = 0.0;
    for j in 0..=d {
        for i in 0..=len - d {
            if i == 0 && j == 0 {
                continue;
            }
            let pair = (1.0 - p1c).powi(i as i32) * p0c.powi((len - d - i) as i32);
            acc += binom(d, j) * binom(len - d, i) * pair * pair;
        }
    }
    acc / (2f64.powi(len as i32) - 1.0)
}

/// Closed forms against [`enumerate_correlator`] for both rules and every `l`,
/// plus the energy-detector reduction of the triggered rule.
pub fn enumeration_checks(sigs: &[Signature], lambdas: &[f64], snrs_db: &[f64], tol: f64) -> Result<Report> {
    let mut report = Report::default();
    for sig in sigs {
        for &snr in snrs_db {
            let noise = NoiseModel::from_snr_db(snr)?;
            for &lambda in lambdas {
                let probs = BitProbs::new(lambda, &noise);
                let tag = format!("L={} d={} snr={snr} lambda={lambda}", sig.len(), sig.ones());
                for rule in [MatchRule::Triggered, MatchRule::HammingBall] {
                    let profile = CorrProfile::new(sig, &probs, rule);
                    for l in 0..=sig.len() {
                        let (a, e) = (profile.at(l), enumerate_correlator(sig, &probs, rule, l));
                        let err = (a.h1 - e.h1).abs().max((a.h0a - e.h0a).abs()).max((a.h0b - e.h0b).abs());
                        report.checks.push(Check { name: format!("enum {rule:?} l={l} {tag}"), margin: err / tol });
                    }
                }
                let trig = trigger_conditionals_uniform(sig, lambda, &noise);
                let corr = CorrProfile::new(sig, &probs, MatchRule::Triggered).at(sig.len() - 1);
                let err = (trig.h0b - corr.h0b).abs().max((trig.h1 - corr.h1).abs()).max((trig.h0a - corr.h0a).abs());
                report.checks.push(Check { name: format!("trigger reduction {tag}"), margin: err / tol });
            }
        }
    }
    Ok(report)
}

/// Everything `validate` runs.
pub fn run(cfg: &ValidationConfig) -> Result<Report> {
    let mut report = agreement_matrix(cfg)?;
    let sigs = [
        cfg.signature,
        "1011".parse()?,
        "1100101101".parse()?,
    ];
    report.checks.extend(enumeration_checks(&sigs, &[0.2, 0.5, 0.8], &[6.0, 15.0], 1e-12)?.checks);
    if cfg.fault == Fault::DuplicatedKernel {
        for &snr in &cfg.snrs_db {
            let noise = NoiseModel::from_snr_db(snr)?;
            let probs = BitProbs::new(0.5, &noise);
            let e = enumerate_correlator(&cfg.signature, &probs, MatchRule::Triggered, 0).h0b;
            let k = duplicated_factor_kernel(&cfg.signature, &probs);
            report.checks.push(Check { name: format!("kernel in use vs enumeration snr={snr}"), margin: (k - e).abs() / 1e-12 });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_agrees_with_closed_forms() {
        let sigs = ["10011010".parse().unwrap(), "110".parse().unwrap()];
        let r = enumeration_checks(&sigs, &[0.3, 0.5], &[6.0, 12.0], 1e-12).unwrap();
        assert!(r.passed(), "{:?}", r.worst());
    }

    #[test]
    fn duplicated_kernel_disagrees() {
        let sig: Signature = "10011010".parse().unwrap();
        let probs = BitProbs::new(0.5, &NoiseModel::from_snr_db(6.0).unwrap());
        let e = enumerate_correlator(&sig, &probs, MatchRule::Triggered, 0).h0b;
        assert!((duplicated_factor_kernel(&sig, &probs) - e).abs() > 1e-6);
    }

    #[test]
    fn small_matrix_passes_and_fault_fails() {
        let cfg = ValidationConfig { trials: 20_000, snrs_db: vec![6.0], fractions: vec![0.3, 0.5, 0.7], ..Default::default() };
        assert!(agreement_matrix(&cfg).unwrap().passed());
        let bad = ValidationConfig { fault: Fault::DuplicatedKernel, ..cfg };
        assert!(!run(&bad).unwrap().passed());
    }
}
