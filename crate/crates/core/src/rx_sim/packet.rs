//! Packet-level receiver: comparator, data-locked startable oscillator and the
//! preamble/payload state machine.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Result};
use crate::model::{NoiseModel, Signature};

/// Bits of lead-in silence, one preamble, one payload and a silent tail, sent
/// in that order. Payload bit `i` is `(payload >> i) & 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PacketFormat {
    pub preamble: Signature,
    /// Word on the air.
    pub payload: u32,
    /// Word the receiver wakes on.
    pub target: u32,
    pub lead_in: u32,
    pub tail: u32,
}

pub const PREAMBLE_LEN: u32 = 8;
pub const PAYLOAD_LEN: u32 = 32;
pub const PACKET_LEN: u32 = PREAMBLE_LEN + PAYLOAD_LEN;
/// Clock cycles the preamble search stays armed after a trigger.
pub const PREAMBLE_WINDOW: u32 = 16;

/// Default payload. Its longest stretch between rising edges is 5 bits.
pub const DEFAULT_PAYLOAD: u32 = 0xB2CE_59A7;

impl PacketFormat {
    pub fn new(preamble: Signature, payload: u32, target: u32) -> Result<Self> {
        if preamble.len() != PREAMBLE_LEN {
            return domain(format!("preamble must be {PREAMBLE_LEN} bits, got {}", preamble.len()));
        }
        if !preamble.bit(0) {
            return domain("preamble must start with a one");
        }
        Ok(Self { preamble, payload, target, lead_in: 8, tail: 16 })
    }

    /// The same format transmitting the target with its `n` lowest set bits
    /// cleared.
    pub fn wrong_payload(&self, n: u32) -> Result<Self> {
        if self.target.count_ones() < n {
            return domain(format!("target has fewer than {n} ones"));
        }
        let mut w = self.target;
        for _ in 0..n {
            w &= w - 1;
        }
        Ok(Self { payload: w, ..*self })
    }

    pub fn stream_len(&self) -> usize {
        (self.lead_in + PACKET_LEN + self.tail) as usize
    }

    /// Transmitted bits, silence included.
    pub fn stream(&self) -> Vec<bool> {
        let mut v = vec![false; self.lead_in as usize];
        v.extend(self.preamble.bits());
        v.extend((0..PAYLOAD_LEN).map(|i| self.payload >> i & 1 == 1));
        v.resize(self.stream_len(), false);
        v
    }
}

impl Default for PacketFormat {
    fn default() -> Self {
        let pre: Signature = "10011010".parse().expect("valid preamble");
        Self::new(pre, DEFAULT_PAYLOAD, DEFAULT_PAYLOAD).expect("valid format")
    }
}

/// Startable relaxation oscillator. Time is measured in nominal bit periods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorModel {
    pub nominal_rate_hz: f64,
    /// Free-running frequency error as a fraction of nominal.
    pub frac_freq_error: f64,
    /// Fraction of the period error removed at each rising edge; 0 keeps the
    /// free-running period and only re-aligns phase.
    pub lock_gain: f64,
}

pub const MAX_FREQ_ERROR: f64 = 0.15;

impl OscillatorModel {
    pub fn new(nominal_rate_hz: f64, frac_freq_error: f64, lock_gain: f64) -> Result<Self> {
        if !(nominal_rate_hz > 0.0) {
            return domain("oscillator rate must be positive");
        }
        if !(frac_freq_error.abs() <= MAX_FREQ_ERROR) {
            return domain(format!("|frequency error| {frac_freq_error} exceeds {MAX_FREQ_ERROR}"));
        }
        if !(0.0..=1.0).contains(&lock_gain) {
            return domain("lock gain must lie in [0, 1]");
        }
        Ok(Self { nominal_rate_hz, frac_freq_error, lock_gain })
    }

    pub fn with_error(self, frac_freq_error: f64) -> Result<Self> {
        Self::new(self.nominal_rate_hz, frac_freq_error, self.lock_gain)
    }

    pub fn phase_only(self) -> Self {
        Self { lock_gain: 0.0, ..self }
    }

    /// Free-running period in nominal bit periods.
    pub fn period(&self) -> f64 {
        1.0 / (1.0 + self.frac_freq_error)
    }

    pub fn bit_period_s(&self) -> f64 {
        1.0 / self.nominal_rate_hz
    }
}

impl Default for OscillatorModel {
    fn default() -> Self {
        Self { nominal_rate_hz: 200e3, frac_freq_error: 0.0, lock_gain: 0.75 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PacketOutcome {
    pub woke: bool,
    pub preamble_found: bool,
    /// Captured payload against the transmitted one; 0 if nothing was captured.
    pub bit_errors: u32,
    /// `|f_clk / f_nominal - 1|` when the preamble matched.
    pub lock_error: Option<f64>,
    /// Largest distance of a sampling instant from the centre of the bit it
    /// stands for, over every sample the oscillator took.
    pub max_sample_offset: f64,
    /// The same, over the payload samples only.
    pub payload_drift: Option<f64>,
    /// Bit periods from the first rising edge of the comparator to wake.
    pub wake_time: Option<f64>,
    /// Trace index the first payload sample fell in.
    pub payload_start: Option<usize>,
}

/// Additive offset at the comparator input, relative to a threshold that has
/// already been re-centred for any constant shift.
pub trait Disturbance {
    fn offset(&self, bit_index: usize, bit: bool) -> f64;
}

pub struct NoDisturbance;

impl Disturbance for NoDisturbance {
    fn offset(&self, _: usize, _: bool) -> f64 {
        0.0
    }
}

/// One comparator decision per bit: `bit + noise + disturbance > threshold`.
pub fn comparator<R: Rng + ?Sized>(
    tx: &[bool],
    noise: &NoiseModel,
    threshold: f64,
    dist: &dyn Disturbance,
    rng: &mut R,
) -> Vec<bool> {
    let sigma = noise.sigma();
    tx.iter()
        .enumerate()
        .map(|(k, &b)| {
            let n: f64 = rng.sample(StandardNormal);
            let z = if b { 1.0 } else { 0.0 } + sigma * n + dist.offset(k, b);
            z > threshold
        })
        .collect()
}

enum Fsm {
    Search { reg: u64, count: u32 },
    Capture { word: u32, count: u32 },
}

/// Runs oscillator and state machine over a comparator trace.
pub fn run_receiver(trace: &[bool], fmt: &PacketFormat, osc: &OscillatorModel) -> PacketOutcome {
    let n = trace.len() as f64;
    let edges: Vec<usize> = (0..trace.len()).filter(|&k| trace[k] && (k == 0 || !trace[k - 1])).collect();
    let mut out = PacketOutcome::default();
    let Some(&first) = edges.first() else { return out };
    let mut ei = 0;
    'armed: while ei < edges.len() {
        let start = edges[ei];
        ei += 1;
        let mut period = osc.period();
        let mut t_ref = start as f64;
        let mut m = 0u32;
        let mut j = 0u32;
        let mut fsm = Fsm::Search { reg: 0, count: 0 };
        loop {
            let s = t_ref + (m as f64 + 0.5) * period;
            if ei < edges.len() && edges[ei] as f64 <= s {
                let e = edges[ei] as f64;
                ei += 1;
                if osc.lock_gain > 0.0 {
                    let cycles = ((e - t_ref) / period).round();
                    if cycles >= 1.0 {
                        period += osc.lock_gain * ((e - t_ref) / cycles - period);
                    }
                }
                t_ref = e;
                m = 0;
                continue;
            }
            if s >= n {
                break 'armed;
            }
            let v = trace[s as usize];
            m += 1;
            let offset = (s - (start as f64 + j as f64 + 0.5)).abs();
            j += 1;
            out.max_sample_offset = out.max_sample_offset.max(offset);
            match &mut fsm {
                Fsm::Search { reg, count } => {
                    *reg = (*reg >> 1) | ((v as u64) << (PREAMBLE_LEN - 1));
                    *count += 1;
                    if *count >= PREAMBLE_LEN && *reg == fmt.preamble.word() {
                        out.preamble_found = true;
                        out.lock_error = Some((1.0 / period - 1.0).abs());
                        fsm = Fsm::Capture { word: 0, count: 0 };
                    } else if *count == PREAMBLE_WINDOW {
                        // Edges up to `s` are consumed; re-arm on a later one.
                        continue 'armed;
                    }
                }
                Fsm::Capture { word, count } => {
                    if *count == 0 {
                        out.payload_start = Some(s as usize);
                    }
                    *word |= (v as u32) << *count;
                    *count += 1;
                    let d = out.payload_drift.unwrap_or(0.0).max(offset);
                    out.payload_drift = Some(d);
                    if *count == PAYLOAD_LEN {
                        out.bit_errors = (*word ^ fmt.payload).count_ones();
                        out.woke = *word == fmt.target;
                        if out.woke {
                            out.wake_time = Some(s + 0.5 * period - first as f64);
                        }
                        break 'armed;
                    }
                }
            }
        }
    }
    out
}

pub fn simulate_packet<R: Rng + ?Sized>(
    fmt: &PacketFormat,
    noise: &NoiseModel,
    osc: &OscillatorModel,
    threshold: f64,
    rng: &mut R,
) -> PacketOutcome {
    simulate_packet_with(fmt, noise, osc, threshold, &NoDisturbance, rng)
}

pub fn simulate_packet_with<R: Rng + ?Sized>(
    fmt: &PacketFormat,
    noise: &NoiseModel,
    osc: &OscillatorModel,
    threshold: f64,
    dist: &dyn Disturbance,
    rng: &mut R,
) -> PacketOutcome {
    let trace = comparator(&fmt.stream(), noise, threshold, dist, rng);
    run_receiver(&trace, fmt, osc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monte_carlo::{stream, trial_rng};

    fn quiet() -> NoiseModel {
        NoiseModel::from_sigma(1e-9).unwrap()
    }

    /// Largest phase-only drift: `(m + 1/2) |T - 1|` maximised over the
    /// samples between consecutive rising edges of the noiseless packet.
    fn drift_oracle(fmt: &PacketFormat, err: f64) -> f64 {
        let tx = fmt.stream();
        let period = 1.0 / (1.0 + err);
        let edges: Vec<usize> = (0..tx.len()).filter(|&k| tx[k] && (k == 0 || !tx[k - 1])).collect();
        let end = fmt.lead_in as usize + PACKET_LEN as usize;
        let mut worst = 0.0f64;
        for (i, &e) in edges.iter().enumerate() {
            if e >= end {
                break;
            }
            let next = edges.get(i + 1).copied().unwrap_or(end).min(end);
            // Samples taken before the next edge re-aligns the phase.
            let mut m = 0;
            while e as f64 + (m as f64 + 0.5) * period < next as f64 && e + m < end {
                worst = worst.max((m as f64 + 0.5) * (period - 1.0).abs());
                m += 1;
            }
        }
        worst
    }

    #[test]
    fn ideal_channel_wakes() {
        let fmt = PacketFormat::default();
        let out = simulate_packet(&fmt, &quiet(), &OscillatorModel::default(), 0.5, &mut trial_rng(0, stream::PACKET, 0));
        assert!(out.woke && out.preamble_found);
        assert_eq!(out.bit_errors, 0);
        assert_eq!(out.wake_time, Some(40.0));
        assert_eq!(out.max_sample_offset, 0.0);
    }

    #[test]
    fn latency_is_forty_bits_for_any_lead_in() {
        for lead in [0, 1, 5, 13] {
            let fmt = PacketFormat { lead_in: lead, ..PacketFormat::default() };
            let out = run_receiver(&fmt.stream(), &fmt, &OscillatorModel::default());
            assert_eq!(out.wake_time, Some(40.0));
        }
    }

    #[test]
    fn phase_realignment_bounds_drift() {
        let fmt = PacketFormat::default();
        for err in [-0.05, -0.02, 0.02, 0.05] {
            let osc = OscillatorModel::default().with_error(err).unwrap().phase_only();
            let out = run_receiver(&fmt.stream(), &fmt, &osc);
            let oracle = drift_oracle(&fmt, err);
            assert!((out.max_sample_offset - oracle).abs() < 1e-12, "{err}: {} vs {oracle}", out.max_sample_offset);
            assert!(out.max_sample_offset < 0.5);
            assert!(out.woke);
        }
    }

    #[test]
    fn long_runs_without_edges_slip() {
        // Twenty ones then twenty zeros: nothing re-aligns the phase, so a 5%
        // fast clock takes an extra sample before the packet ends.
        let pre: Signature = "10011010".parse().unwrap();
        let fmt = PacketFormat::new(pre, 0x0000_0FFF, 0x0000_0FFF).unwrap();
        let osc = OscillatorModel::default().with_error(0.05).unwrap().phase_only();
        let out = run_receiver(&fmt.stream(), &fmt, &osc);
        assert!(out.max_sample_offset > 0.5);
        assert!(!out.woke);
    }

    #[test]
    fn lock_settles_within_one_percent() {
        let fmt = PacketFormat::default();
        for k in 0..=20 {
            let err = -0.05 + 0.005 * k as f64;
            let osc = OscillatorModel::default().with_error(err).unwrap();
            let out = run_receiver(&fmt.stream(), &fmt, &osc);
            assert!(out.lock_error.unwrap() < 0.01, "{err}: {:?}", out.lock_error);
            // Drift over the 32 payload bits stays far inside half a bit.
            assert!(out.payload_drift.unwrap() < 0.1, "{err}: {:?}", out.payload_drift);
            assert!(out.woke);
        }
    }

    #[test]
    fn wrong_payload_never_wakes() {
        let fmt = PacketFormat::default().wrong_payload(2).unwrap();
        assert_eq!((fmt.payload ^ fmt.target).count_ones(), 2);
        for snr in [40.0, 12.0, 3.0] {
            let noise = NoiseModel::from_snr_db(snr).unwrap();
            for t in 0..2000 {
                let out = simulate_packet(&fmt, &noise, &OscillatorModel::default(), 0.5, &mut trial_rng(1, stream::PACKET, t));
                assert!(!out.woke);
            }
        }
    }

    #[test]
    fn missed_preamble_waits_for_a_new_edge() {
        let fmt = PacketFormat::default();
        // A lone glitch long before the packet starts and expires the window.
        let mut trace = vec![false; 30];
        trace[2] = true;
        trace.extend(fmt.stream().into_iter().skip(fmt.lead_in as usize));
        let out = run_receiver(&trace, &fmt, &OscillatorModel::default());
        assert!(out.woke);
        assert_eq!(out.wake_time, Some(28.0 + 40.0));
        // A glitch just before the preamble is absorbed by the shift register.
        let mut trace = fmt.stream();
        trace[fmt.lead_in as usize - 3] = true;
        let out = run_receiver(&trace, &fmt, &OscillatorModel::default());
        assert!(out.woke);
        assert_eq!(out.wake_time, Some(43.0));
    }

    #[test]
    fn a_second_edge_inside_the_window_does_not_re_arm() {
        let fmt = PacketFormat::default();
        // Glitch 12 bits ahead: the window closes 4 bits into the preamble,
        // and the next rising edge is the preamble's seventh bit, too late.
        let fmt = PacketFormat { lead_in: 16, ..fmt };
        let mut trace = fmt.stream();
        trace[4] = true;
        let out = run_receiver(&trace, &fmt, &OscillatorModel::default());
        assert!(!out.woke);
        trace[4] = false;
        trace[9] = true;
        assert!(run_receiver(&trace, &fmt, &OscillatorModel::default()).woke);
    }

    #[test]
    fn format_validation() {
        assert!("00011010".parse::<Signature>().is_err());
        let short: Signature = "1001101".parse().unwrap();
        assert!(PacketFormat::new(short, 0, 0).is_err());
        assert!(OscillatorModel::new(200e3, 0.2, 0.5).is_err());
        assert!(OscillatorModel::new(200e3, 0.15, 1.5).is_err());
        assert!(PacketFormat { target: 1, ..PacketFormat::default() }.wrong_payload(2).is_err());
        assert_eq!(PacketFormat::default().stream().len(), 8 + 40 + 16);
    }
}
