//! CW and AM interferers through the square-law detector.
//!
//! With signal envelope `b` (0 or 1) and interferer envelope
//! `sqrt(r) (1 + m cos theta)` at an offset `df`, the detector output is
//! `|b + sqrt(r)(1 + m cos theta) e^{j phi}|^2`. Its constant part
//! `r (1 + m^2/2)` is removed by re-centring the threshold; the remaining
//! terms pass the baseband amplifier with first-order gain `|H(f)|`:
//!
//! * beat `2 sqrt(r) b (1 + m cos theta) |H(df)| cos phi`, present only on ones;
//! * AM `2 m r |H(f_m)| cos theta + (m^2 r / 2) |H(2 f_m)| cos 2 theta`.
//!
//! The interferer is not synchronised to the data, so `phi` and `theta` at
//! each bit centre are drawn independently and uniformly.

use std::f64::consts::TAU;

use rand::Rng;

use super::curves::{tally, PacketTally};
use super::frontend::{first_order_gain, input_power_to_snr, resonator_power_gain, DiodeParams, FrontEndParams};
use super::packet::{run_receiver, comparator, Disturbance, OscillatorModel, PacketFormat};
use crate::error::{domain, Result};
use crate::monte_carlo::{stream, trial_rng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InterfererKind {
    Cw,
    Am { depth: f64, mod_hz: f64 },
}

impl InterfererKind {
    /// 5% depth with 400 kHz modulation.
    pub fn am_default() -> Self {
        Self::Am { depth: 0.05, mod_hz: 400e3 }
    }

    fn depth(&self) -> f64 {
        match self {
            Self::Cw => 0.0,
            Self::Am { depth, .. } => *depth,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interferer {
    pub kind: InterfererKind,
    pub offset_hz: f64,
    pub sir_db: f64,
}

impl Interferer {
    pub fn new(kind: InterfererKind, offset_hz: f64, sir_db: f64) -> Result<Self> {
        if let InterfererKind::Am { depth, mod_hz } = kind {
            if !(depth > 0.0 && depth <= 1.0) {
                return domain(format!("AM depth {depth} outside (0, 1]"));
            }
            if !(mod_hz > 0.0) {
                return domain("AM modulation frequency must be positive");
            }
        }
        if !(offset_hz >= 0.0) || sir_db.is_nan() {
            return domain("offset must be non-negative and SIR defined");
        }
        Ok(Self { kind, offset_hz, sir_db })
    }

    /// Interferer-to-signal power after the input band-pass network.
    pub fn power_ratio(&self, fe: &FrontEndParams) -> f64 {
        if self.sir_db == f64::INFINITY {
            return 0.0;
        }
        10f64.powf(-self.sir_db / 10.0) * resonator_power_gain(self.offset_hz, fe.carrier_hz, fe.bpf_q)
    }

    /// Draws the per-bit phases of one packet.
    pub fn realize<R: Rng + ?Sized>(&self, fe: &FrontEndParams, bits: usize, rng: &mut R) -> Realization {
        let r = self.power_ratio(fe);
        let m = self.kind.depth();
        let b = fe.amp_bandwidth_hz;
        let beat = 2.0 * r.sqrt() * first_order_gain(self.offset_hz, b);
        let (am1, am2) = match self.kind {
            InterfererKind::Cw => (0.0, 0.0),
            InterfererKind::Am { mod_hz, .. } => (
                2.0 * m * r * first_order_gain(mod_hz, b),
                0.5 * m * m * r * first_order_gain(2.0 * mod_hz, b),
            ),
        };
        let phases = (0..bits).map(|_| (rng.random::<f64>() * TAU, rng.random::<f64>() * TAU)).collect();
        Realization { beat, depth: m, am1, am2, phases }
    }
}

pub struct Realization {
    beat: f64,
    depth: f64,
    am1: f64,
    am2: f64,
    /// `(phi, theta)` per bit.
    phases: Vec<(f64, f64)>,
}

impl Disturbance for Realization {
    fn offset(&self, k: usize, bit: bool) -> f64 {
        let (phi, theta) = self.phases[k];
        let am = self.am1 * theta.cos() + self.am2 * (2.0 * theta).cos();
        if bit {
            am + self.beat * (1.0 + self.depth * theta.cos()) * phi.cos()
        } else {
            am
        }
    }
}

/// Wake counts for packets sent at `p_in_dbm` alongside the interferer. Noise
/// draws come from the packet streams and interferer phases from their own,
/// so an absent interferer reproduces the plain packet simulation exactly.
#[allow(clippy::too_many_arguments)]
pub fn interferer_tally(
    itf: &Interferer,
    fmt: &PacketFormat,
    fe: &FrontEndParams,
    diode: &DiodeParams,
    osc: &OscillatorModel,
    p_in_dbm: f64,
    n: u64,
    seed: u64,
) -> Result<PacketTally> {
    let noise = input_power_to_snr(p_in_dbm, fe, diode)?;
    let tx = fmt.stream();
    tally(n, seed, stream::PACKET, |i, rng| {
        let real = itf.realize(fe, tx.len(), &mut trial_rng(seed, stream::INTERFERER, i));
        let trace = comparator(&tx, &noise, fe.threshold_v, &real, rng);
        run_receiver(&trace, fmt, osc)
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirRow {
    pub sir_db: f64,
    pub success: f64,
}

/// Wake success at each SIR, highest SIR first.
#[allow(clippy::too_many_arguments)]
pub fn interferer_sim(
    kind: InterfererKind,
    offset_hz: f64,
    sirs_db: &[f64],
    fmt: &PacketFormat,
    fe: &FrontEndParams,
    diode: &DiodeParams,
    osc: &OscillatorModel,
    p_in_dbm: f64,
    n: u64,
    seed: u64,
) -> Result<Vec<SirRow>> {
    let mut sirs = sirs_db.to_vec();
    sirs.sort_by(|a, b| b.total_cmp(a));
    sirs.into_iter()
        .map(|sir| {
            let itf = Interferer::new(kind, offset_hz, sir)?;
            let t = interferer_tally(&itf, fmt, fe, diode, osc, p_in_dbm, n, seed)?;
            Ok(SirRow { sir_db: sir, success: t.wake_rate().p_hat })
        })
        .collect()
}

/// Lowest SIR reached from the top of `rows` (sorted by falling SIR) before
/// success first drops under `min_success`.
pub fn sir_tolerance(rows: &[SirRow], min_success: f64) -> Option<f64> {
    rows.iter().take_while(|r| r.success >= min_success).last().map(|r| r.sir_db)
}

/// Operating point for interferer tests: 6 dB above the sensitivity anchor.
pub const INTERFERER_POWER_DBM: f64 = -44.0;
pub const TOLERANCE_SUCCESS: f64 = 0.9;

/// SIR grid from +10 dB down to -30 dB in 0.5 dB steps.
pub fn default_sir_grid() -> Vec<f64> {
    (0..=80).map(|k| 10.0 - 0.5 * k as f64).collect()
}

/// CW tolerance at 10 MHz offset for a given amplifier bandwidth.
pub fn cw_tolerance(fe: &FrontEndParams, n: u64, seed: u64) -> Result<Option<f64>> {
    let rows = interferer_sim(
        InterfererKind::Cw,
        10e6,
        &default_sir_grid(),
        &PacketFormat::default(),
        fe,
        &DiodeParams::table_i(),
        &OscillatorModel::default(),
        INTERFERER_POWER_DBM,
        n,
        seed,
    )?;
    Ok(sir_tolerance(&rows, TOLERANCE_SUCCESS))
}

/// Bisection on the amplifier bandwidth (log scale) for a CW tolerance of
/// `target_db`. Used once to fix the default bandwidth.
pub fn calibrate_amp_bandwidth(target_db: f64, n: u64, seed: u64) -> Result<f64> {
    let base = FrontEndParams::default();
    let (mut lo, mut hi) = (1e4f64.ln(), 1e7f64.ln());
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        let tol = cw_tolerance(&base.with_amp_bandwidth(mid.exp())?, n, seed)?.unwrap_or(f64::INFINITY);
        // Wider bandwidth lets more beat through and raises the tolerable SIR.
        if tol > target_db {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}
