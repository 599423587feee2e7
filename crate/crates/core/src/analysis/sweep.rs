//! Parameter sweeps with analytic and simulated columns side by side.

use crate::detectors::{self, Conditionals, DetectorKind};
use crate::error::{domain, Result};
use crate::model::{DetectorParams, NoiseModel, Priors, Signature};
use crate::monte_carlo::{simulate_grid, SimConfig, TrialPlan};

/// Simulated counterpart of one sweep cell, with standard errors evaluated at
/// the analytic rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McColumns {
    pub p_fa: f64,
    pub p_d: f64,
    pub p_fa_se: f64,
    pub p_d_se: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub kind: DetectorKind,
    pub snr_db: f64,
    pub l: u32,
    pub lambda: f64,
    pub p_fa: f64,
    pub p_d: f64,
    pub cond: Conditionals,
    pub mc: Option<McColumns>,
}

impl SweepRow {
    /// Both simulated coordinates within `k` standard errors (plus `1e-9`) of
    /// the analytic ones; `true` when no simulation was run.
    pub fn agrees(&self, k: f64) -> bool {
        match self.mc {
            None => true,
            Some(m) => {
                (m.p_fa - self.p_fa).abs() <= k * m.p_fa_se + 1e-9
                    && (m.p_d - self.p_d).abs() <= k * m.p_d_se + 1e-9
            }
        }
    }
}

/// Analytic (and optionally simulated) statistics at every `(l, lambda)`.
pub fn sweep(
    kind: DetectorKind,
    sig: &Signature,
    noise: &NoiseModel,
    priors: &Priors,
    ls: &[u32],
    lambdas: &[f64],
    mc: Option<&TrialPlan>,
) -> Result<Vec<SweepRow>> {
    if ls.is_empty() || lambdas.is_empty() {
        return domain("sweep grid is empty");
    }
    let grid: Vec<DetectorParams> = ls
        .iter()
        .flat_map(|&l| lambdas.iter().map(move |&lambda| DetectorParams::new(lambda, l)))
        .collect();
    let mut rows = Vec::with_capacity(grid.len());
    for p in &grid {
        let cond = detectors::conditionals(kind, sig, p, noise)?;
        let s = cond.stats(priors)?;
        rows.push(SweepRow {
            kind,
            snr_db: noise.snr_db(),
            l: p.l,
            lambda: p.lambda,
            p_fa: s.p_fa,
            p_d: s.p_d,
            cond,
            mc: None,
        });
    }
    if let Some(plan) = mc {
        let sims = simulate_grid(kind, SimConfig::for_kind(kind), sig, &grid, noise, priors, plan)?;
        for (row, sim) in rows.iter_mut().zip(sims) {
            let n = sim.h1.n as f64;
            row.mc = Some(McColumns {
                p_fa: sim.p_fa(),
                p_d: sim.p_d(),
                p_fa_se: sim.p_fa_std_err(row.cond.h0a, row.cond.h0b),
                p_d_se: (row.p_d * (1.0 - row.p_d) / n).max(0.0).sqrt(),
            });
        }
    }
    Ok(rows)
}

/// Correlator P_FA / P_D over mismatch allowances and thresholds.
pub fn sweep_l_threshold(
    sig: &Signature,
    noise: &NoiseModel,
    priors: &Priors,
    ls: &[u32],
    lambdas: &[f64],
    mc: Option<&TrialPlan>,
) -> Result<Vec<SweepRow>> {
    sweep(DetectorKind::Corr, sig, noise, priors, ls, lambdas, mc)
}

/// Correlator P_FA / P_D over thresholds at each SNR.
pub fn sweep_snr_threshold(
    sig: &Signature,
    priors: &Priors,
    l: u32,
    lambdas: &[f64],
    snrs_db: &[f64],
    mc: Option<&TrialPlan>,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &snr in snrs_db {
        let noise = NoiseModel::from_snr_db(snr)?;
        rows.extend(sweep(DetectorKind::Corr, sig, &noise, priors, &[l], lambdas, mc)?);
    }
    Ok(rows)
}

/// Threshold maximising `P_D - P_FA` over `rows`; ties go to the lower threshold.
pub fn best_threshold(rows: &[SweepRow]) -> Option<f64> {
    rows.iter()
        .fold(None::<&SweepRow>, |best, r| match best {
            Some(b) if b.p_d - b.p_fa > r.p_d - r.p_fa => Some(b),
            Some(b) if b.p_d - b.p_fa == r.p_d - r.p_fa && b.lambda <= r.lambda => Some(b),
            _ => Some(r),
        })
        .map(|r| r.lambda)
}
