//! Receiver operating characteristics.

use rayon::prelude::*;

use super::step_grid;
use crate::detectors::{self, CorrProfile, DetectorKind, MatchRule};
use crate::error::{domain, Result};
use crate::model::{BitProbs, DetectorParams, NoiseModel, Priors, Signature};

/// Parameter cells swept for one curve. `ls` only matters for the correlator.
#[derive(Debug, Clone, PartialEq)]
pub struct RocGrid {
    pub lambdas: Vec<f64>,
    pub ls: Vec<u32>,
}

impl RocGrid {
    /// Thresholds over the detector's default range at the given step; the
    /// correlator also sweeps `l = 0..=L`.
    pub fn default_for(kind: DetectorKind, sig: &Signature, step: f64) -> Self {
        let (lo, hi) = kind.lambda_range(sig.len());
        let step = match kind {
            DetectorKind::OokMf | DetectorKind::BpskMf => step * sig.len() as f64 / 2.0,
            _ => step,
        };
        let ls = match kind {
            DetectorKind::Corr => (0..=sig.len()).collect(),
            _ => vec![0],
        };
        Self {
            lambdas: step_grid(lo, hi, step),
            ls,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub p_fa: f64,
    pub p_d: f64,
    pub lambda: f64,
    pub l: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub kind: DetectorKind,
    /// One point per grid cell, in grid order (lambda-major).
    pub points: Vec<RocPoint>,
}

impl RocCurve {
    /// Upper staircase: points sorted by P_FA with a running maximum of P_D.
    pub fn canonical(&self) -> Vec<(f64, f64)> {
        canonicalize(self.points.iter().map(|p| (p.p_fa, p.p_d)))
    }

    /// Best P_D reachable at a false-alarm rate of at most `p_fa`.
    pub fn pd_at(&self, p_fa: f64) -> f64 {
        self.points
            .iter()
            .filter(|p| p.p_fa <= p_fa)
            .map(|p| p.p_d)
            .fold(0.0, f64::max)
    }
}

pub fn canonicalize(points: impl IntoIterator<Item = (f64, f64)>) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points.into_iter().collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    let mut best = f64::NEG_INFINITY;
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for (fa, pd) in pts {
        best = best.max(pd);
        match out.last_mut() {
            Some(last) if last.0 == fa => last.1 = best,
            _ => out.push((fa, best)),
        }
    }
    out
}

/// Trapezoidal area under the canonical staircase closed at (0,0) and (1,1).
pub fn auc_points(points: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    let mut pts = vec![(0.0, 0.0)];
    pts.extend(canonicalize(points));
    pts.push((1.0, 1.0));
    let pts = canonicalize(pts);
    pts.windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum()
}

pub fn auc(curve: &RocCurve) -> f64 {
    auc_points(curve.points.iter().map(|p| (p.p_fa, p.p_d)))
}

pub fn roc(
    kind: DetectorKind,
    sig: &Signature,
    noise: &NoiseModel,
    priors: &Priors,
    grid: &RocGrid,
) -> Result<RocCurve> {
    if grid.lambdas.is_empty() || grid.ls.is_empty() {
        return domain("ROC grid is empty");
    }
    let per_lambda: Vec<Vec<RocPoint>> = grid
        .lambdas
        .par_iter()
        .map(|&lambda| -> Result<Vec<RocPoint>> {
            match kind {
                DetectorKind::Corr => {
                    let probs = BitProbs::new(lambda, noise);
                    let profile = CorrProfile::new(sig, &probs, MatchRule::Triggered);
                    grid.ls
                        .iter()
                        .map(|&l| {
                            DetectorParams::new(lambda, l).check_for(sig)?;
                            let s = profile.at(l).stats(priors)?;
                            Ok(RocPoint { p_fa: s.p_fa, p_d: s.p_d, lambda, l })
                        })
                        .collect()
                }
                _ => {
                    let s = detectors::stats(kind, sig, &DetectorParams::new(lambda, 0), noise, priors)?;
                    Ok(vec![RocPoint { p_fa: s.p_fa, p_d: s.p_d, lambda, l: 0 }])
                }
            }
        })
        .collect::<Result<_>>()?;
    Ok(RocCurve {
        kind,
        points: per_lambda.into_iter().flatten().collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AucRow {
    pub len: u32,
    pub snr_db: f64,
    pub auc: f64,
}

/// AUC of `kind` for balanced signatures of each length at each SNR.
pub fn auc_vs_length(
    kind: DetectorKind,
    lens: &[u32],
    snrs_db: &[f64],
    priors: &Priors,
    step: f64,
) -> Result<Vec<AucRow>> {
    let mut rows = Vec::with_capacity(lens.len() * snrs_db.len());
    for &snr_db in snrs_db {
        let noise = NoiseModel::from_snr_db(snr_db)?;
        for &len in lens {
            let sig = Signature::balanced(len)?;
            let curve = roc(kind, &sig, &noise, priors, &RocGrid::default_for(kind, &sig, step))?;
            rows.push(AucRow { len, snr_db, auc: auc(&curve) });
        }
    }
    Ok(rows)
}
