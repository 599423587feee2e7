//! Expected energy per wake-up opportunity and the exhaustive
//! parameter search over it.

use std::cmp::Ordering;

use super::step_grid;
use crate::detectors::{self, CorrProfile, DetectionStats, DetectorKind, MatchRule};
use crate::error::{domain, Error, Result};
use crate::model::{BitProbs, DetectorParams, NoiseModel, Priors, Signature};

/// Energies in joules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParams {
    /// One first-phase (ED) decision.
    pub e_ed: f64,
    /// One second-phase activation.
    pub e_corr: f64,
    /// Waking the primary transceiver.
    pub e_rx: f64,
}

/// Primary-transceiver wake energy over ED decision energy in the reference
/// configuration.
pub const GOLDEN_RX_RATIO: f64 = 1e4;

impl EnergyParams {
    pub fn new(e_ed: f64, e_corr: f64, e_rx: f64) -> Result<Self> {
        for (name, v) in [("e_ed", e_ed), ("e_corr", e_corr), ("e_rx", e_rx)] {
            if !(v >= 0.0) || !v.is_finite() {
                return domain(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        Ok(Self { e_ed, e_corr, e_rx })
    }

    /// Energies from average powers over one decision window.
    pub fn from_powers(p_ed_w: f64, p_corr_w: f64, window_s: f64, rx_ratio: f64) -> Result<Self> {
        let e_ed = p_ed_w * window_s;
        Self::new(e_ed, p_corr_w * window_s, rx_ratio * e_ed)
    }

    /// 1.48 uW first phase and 0.2 uW second phase over a 40-bit window at
    /// 200 kbps, with `e_rx = 1e4 * e_ed`.
    pub fn golden() -> Self {
        Self::from_powers(1.48e-6, 0.2e-6, 200e-6, GOLDEN_RX_RATIO).expect("valid constants")
    }
}

/// `E = E_WuRx + (P_D P(H1) + P_FA P(H0)) E_Rx`
pub fn expected_energy(stats: &DetectionStats, priors: &Priors, energies: &EnergyParams, e_wurx: f64) -> f64 {
    e_wurx + (stats.p_d * priors.h1() + stats.p_fa * priors.h0()) * energies.e_rx
}

/// What the search minimises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnergyObjective {
    /// [`expected_energy`] as written. Every missed detection saves a
    /// transceiver wake, so under a P_D floor the minimum sits at the
    /// threshold that detects as little as the floor allows.
    Literal,
    /// Charges a transceiver wake for every signature opportunity, detected
    /// or retried, plus every false alarm:
    /// `E_WuRx + (P(H1) + P_FA P(H0)) E_Rx`.
    #[default]
    ServedWakeups,
}

impl EnergyObjective {
    pub fn evaluate(&self, stats: &DetectionStats, priors: &Priors, energies: &EnergyParams, e_wurx: f64) -> f64 {
        match self {
            Self::Literal => expected_energy(stats, priors, energies, e_wurx),
            Self::ServedWakeups => e_wurx + (priors.h1() + stats.p_fa * priors.h0()) * energies.e_rx,
        }
    }
}

/// Minimum per-transmission P_D such that at least one of `q` transmissions
/// succeeds with probability `gamma`: `1 - (1 - gamma)^(1/q)`.
pub fn min_pd_per_tx(gamma: f64, q: u32) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return domain(format!("gamma must lie in (0, 1), got {gamma}"));
    }
    if q < 1 {
        return domain("at least one transmission is required");
    }
    Ok(1.0 - (1.0 - gamma).powf(1.0 / q as f64))
}

/// Receiver-side energy per decision: the ED alone for the energy detector;
/// for the correlator the ED decision plus a second-phase activation at the
/// ED rate; the matched filters keep both phases always on.
pub fn wurx_energy(ed: &DetectionStats, kind: DetectorKind, priors: &Priors, energies: &EnergyParams) -> f64 {
    match kind {
        DetectorKind::Ed => energies.e_ed,
        DetectorKind::Corr => {
            energies.e_ed + (priors.h0() * ed.p_fa + priors.h1() * ed.p_d) * energies.e_corr
        }
        DetectorKind::OokMf | DetectorKind::BpskMf => energies.e_ed + energies.e_corr,
    }
}

/// Search grid. Thresholds for the matched filters are given as fractions of
/// the noiseless H1 statistic range and mapped onto it.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyGrid {
    pub lambdas: Vec<f64>,
    pub ls: Vec<u32>,
}

impl EnergyGrid {
    /// `lambda` in `[0, 1]` step `0.1`; `l = 0..=L` for the correlator.
    pub fn standard(kind: DetectorKind, sig: &Signature) -> Self {
        Self::with_step(kind, sig, 0.1)
    }

    pub fn with_step(kind: DetectorKind, sig: &Signature, step: f64) -> Self {
        Self {
            lambdas: step_grid(0.0, 1.0, step),
            ls: match kind {
                DetectorKind::Corr => (0..=sig.len()).collect(),
                _ => vec![0],
            },
        }
    }
}

fn statistic_threshold(kind: DetectorKind, sig: &Signature, frac: f64) -> f64 {
    match kind {
        DetectorKind::OokMf => frac * sig.ones() as f64,
        DetectorKind::BpskMf => (2.0 * frac - 1.0) * sig.len() as f64,
        _ => frac,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyOptimum {
    /// Threshold on the detector's own statistic.
    pub params: DetectorParams,
    pub energy: f64,
    pub stats: DetectionStats,
    pub e_wurx: f64,
}

/// Exhaustive search with the standard grid and the default objective.
pub fn optimize_energy(
    kind: DetectorKind,
    sig: &Signature,
    noise: &NoiseModel,
    priors: &Priors,
    energies: &EnergyParams,
    pd_min: f64,
) -> Result<EnergyOptimum> {
    let grid = EnergyGrid::standard(kind, sig);
    optimize_energy_with(kind, sig, noise, priors, energies, pd_min, &grid, EnergyObjective::default())
}

/// Minimise `objective` subject to `P_D >= pd_min`; ties go to lower P_FA,
/// then lower threshold, then lower `l`.
///
/// The correlator's trigger bit is the ED decision, so its false-alarm rate
/// already is the two-phase system's; the ED statistics only set the
/// second-phase activation energy.
#[allow(clippy::too_many_arguments)]
pub fn optimize_energy_with(
    kind: DetectorKind,
    sig: &Signature,
    noise: &NoiseModel,
    priors: &Priors,
    energies: &EnergyParams,
    pd_min: f64,
    grid: &EnergyGrid,
    objective: EnergyObjective,
) -> Result<EnergyOptimum> {
    if pd_min.is_nan() {
        return domain("pd_min is NaN");
    }
    if grid.lambdas.is_empty() || grid.ls.is_empty() {
        return domain("energy grid is empty");
    }
    let mut best: Option<EnergyOptimum> = None;
    let mut best_pd = 0.0f64;
    for &frac in &grid.lambdas {
        let lambda = statistic_threshold(kind, sig, frac);
        let ed = detectors::stats(DetectorKind::Ed, sig, &DetectorParams::new(frac, 0), noise, priors)?;
        let e_wurx = wurx_energy(&ed, kind, priors, energies);
        let profile = (kind == DetectorKind::Corr)
            .then(|| CorrProfile::new(sig, &BitProbs::new(lambda, noise), MatchRule::Triggered));
        for &l in &grid.ls {
            let params = DetectorParams::new(lambda, l);
            params.check_for(sig)?;
            let stats = match &profile {
                Some(p) => p.at(l).stats(priors)?,
                None => detectors::stats(kind, sig, &params, noise, priors)?,
            };
            best_pd = best_pd.max(stats.p_d);
            if stats.p_d < pd_min {
                continue;
            }
            let cand = EnergyOptimum {
                params,
                energy: objective.evaluate(&stats, priors, energies, e_wurx),
                stats,
                e_wurx,
            };
            if best.is_none_or(|b| better(&cand, &b)) {
                best = Some(cand);
            }
        }
    }
    best.ok_or(Error::Infeasible { pd_min, best_pd })
}

fn better(a: &EnergyOptimum, b: &EnergyOptimum) -> bool {
    a.energy
        .total_cmp(&b.energy)
        .then(a.stats.p_fa.total_cmp(&b.stats.p_fa))
        .then(a.params.lambda.total_cmp(&b.params.lambda))
        .then(a.params.l.cmp(&b.params.l))
        == Ordering::Less
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> Signature {
        "10011010".parse().unwrap()
    }

    #[test]
    fn retransmission_floor() {
        let five = min_pd_per_tx(0.99, 5).unwrap();
        assert!((five - (1.0 - (0.01f64.ln() / 5.0).exp())).abs() < 1e-15);
        assert!((five - 0.601_893).abs() < 1e-6);
        assert_eq!(min_pd_per_tx(0.7, 1).unwrap(), 0.7);
        assert!((min_pd_per_tx(0.5, 2).unwrap() - (1.0 - 0.5f64.sqrt())).abs() < 1e-15);
        assert!(min_pd_per_tx(1.0, 2).is_err());
        assert!(min_pd_per_tx(0.5, 0).is_err());
    }

    #[test]
    fn energy_substitutions() {
        let p = Priors::default();
        let e = EnergyParams::new(1.0, 2.0, 1000.0).unwrap();
        let ideal = DetectionStats::new(0.0, 1.0).unwrap();
        assert!((expected_energy(&ideal, &p, &e, 3.0) - (3.0 + p.h1() * 1000.0)).abs() < 1e-12);
        let noisy = DetectionStats::new(1.0, 0.4).unwrap();
        let want = 3.0 + (p.h1() * 0.4 + p.h0()) * 1000.0;
        assert!((expected_energy(&noisy, &p, &e, 3.0) - want).abs() < 1e-9);
    }

    #[test]
    fn energy_is_affine() {
        let p = Priors::default();
        let s = DetectionStats::new(0.01, 0.9).unwrap();
        let f = |rx: f64, w: f64| expected_energy(&s, &p, &EnergyParams::new(1.0, 1.0, rx).unwrap(), w);
        let (a, b, c) = (f(10.0, 1.0), f(20.0, 1.0), f(30.0, 1.0));
        assert!(((b - a) - (c - b)).abs() < 1e-12);
        let (a, b, c) = (f(10.0, 1.0), f(10.0, 2.0), f(10.0, 3.0));
        assert!(((b - a) - (c - b)).abs() < 1e-12);
    }

    #[test]
    fn golden_energies() {
        let g = EnergyParams::golden();
        assert!((g.e_ed - 2.96e-10).abs() < 1e-22);
        assert!((g.e_corr - 4e-11).abs() < 1e-22);
        assert!((g.e_rx / g.e_ed - 1e4).abs() < 1e-9);
    }

    #[test]
    fn correlator_optimum_at_high_snr() {
        let pd = min_pd_per_tx(0.99, 5).unwrap();
        for snr in [10.0, 15.0, 20.0] {
            let n = NoiseModel::from_snr_db(snr).unwrap();
            let o = optimize_energy(DetectorKind::Corr, &sig(), &n, &Priors::default(), &EnergyParams::golden(), pd).unwrap();
            assert_eq!((o.params.lambda, o.params.l), (0.5, 0), "{snr} dB");
        }
    }

    #[test]
    fn low_snr_needs_allowance() {
        let pd = min_pd_per_tx(0.99, 5).unwrap();
        let n = NoiseModel::from_snr_db(6.0).unwrap();
        let o = optimize_energy(DetectorKind::Corr, &sig(), &n, &Priors::default(), &EnergyParams::golden(), pd).unwrap();
        assert!(o.params.l > 0);
    }

    #[test]
    fn certain_detection_is_infeasible() {
        let n = NoiseModel::from_snr_db(10.0).unwrap();
        let r = optimize_energy(DetectorKind::Corr, &sig(), &n, &Priors::default(), &EnergyParams::golden(), 1.0);
        assert!(matches!(r, Err(Error::Infeasible { .. })));
    }

    #[test]
    fn finer_grid_never_worse() {
        let pd = 0.6;
        for snr in [6.0, 10.0] {
            let n = NoiseModel::from_snr_db(snr).unwrap();
            for kind in DetectorKind::ALL {
                let run = |step| {
                    let g = EnergyGrid::with_step(kind, &sig(), step);
                    optimize_energy_with(kind, &sig(), &n, &Priors::default(), &EnergyParams::golden(), pd, &g, EnergyObjective::default())
                        .unwrap()
                        .energy
                };
                assert!(run(0.05) <= run(0.1));
            }
        }
    }
}
