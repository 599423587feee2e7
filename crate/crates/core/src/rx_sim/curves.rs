//! Measurement-style sweeps over many simulated packets.

use rayon::prelude::*;

use super::frontend::{input_power_to_snr, DiodeParams, FrontEndParams};
use super::packet::{simulate_packet, OscillatorModel, PacketFormat, PacketOutcome};
use crate::error::{domain, Result};
use crate::model::NoiseModel;
use crate::monte_carlo::{stream, trial_rng, Estimate};

/// Counts over `n` packets generated from `seed`; packet `i` always uses the
/// same random stream, whatever the thread count.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PacketTally {
    pub n: u64,
    pub woke: u64,
    pub preamble_found: u64,
    pub bit_errors: u64,
    pub captured: u64,
}

impl PacketTally {
    fn add(mut self, o: &PacketOutcome) -> Self {
        self.n += 1;
        self.woke += o.woke as u64;
        self.preamble_found += o.preamble_found as u64;
        if o.preamble_found {
            self.captured += 1;
            self.bit_errors += o.bit_errors as u64;
        }
        self
    }

    fn merge(self, o: Self) -> Self {
        Self {
            n: self.n + o.n,
            woke: self.woke + o.woke,
            preamble_found: self.preamble_found + o.preamble_found,
            bit_errors: self.bit_errors + o.bit_errors,
            captured: self.captured + o.captured,
        }
    }

    pub fn wake_rate(&self) -> Estimate {
        Estimate::from_counts(self.woke, self.n)
    }

    pub fn miss_rate(&self) -> Estimate {
        Estimate::from_counts(self.n - self.woke, self.n)
    }

    /// Payload bit-error rate over packets whose preamble matched.
    pub fn payload_ber(&self) -> Estimate {
        Estimate::from_counts(self.bit_errors, self.captured * 32)
    }
}

/// Runs `n` packets through `f`, which gets the packet index and generator.
pub fn tally<F>(n: u64, seed: u64, tag: u64, f: F) -> Result<PacketTally>
where
    F: Fn(u64, &mut rand_chacha::ChaCha8Rng) -> PacketOutcome + Sync,
{
    if n == 0 || n > 1 << 48 {
        return domain(format!("packet count {n} outside 1..=2^48"));
    }
    Ok((0..n)
        .into_par_iter()
        .fold(PacketTally::default, |t, i| t.add(&f(i, &mut trial_rng(seed, tag, i))))
        .reduce(PacketTally::default, PacketTally::merge))
}

pub fn packet_tally(
    fmt: &PacketFormat,
    noise: &NoiseModel,
    osc: &OscillatorModel,
    threshold: f64,
    n: u64,
    seed: u64,
) -> Result<PacketTally> {
    tally(n, seed, stream::PACKET, |_, rng| simulate_packet(fmt, noise, osc, threshold, rng))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MissRow {
    pub p_in_dbm: f64,
    pub snr_db: f64,
    pub miss: Estimate,
    /// Two-sided 95% Wilson interval.
    pub ci: (f64, f64),
}

pub fn wilson_interval(hits: u64, n: u64, z: f64) -> (f64, f64) {
    let n = n as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Missed detection versus input power; every power reuses the same packet
/// streams, so the curve is smooth in power.
#[allow(clippy::too_many_arguments)]
pub fn missed_detection_curve(
    p_in_dbm: &[f64],
    fmt: &PacketFormat,
    fe: &FrontEndParams,
    diode: &DiodeParams,
    osc: &OscillatorModel,
    n: u64,
    seed: u64,
) -> Result<Vec<MissRow>> {
    p_in_dbm
        .iter()
        .map(|&p| {
            let noise = input_power_to_snr(p, fe, diode)?;
            let t = packet_tally(fmt, &noise, osc, fe.threshold_v, n, seed)?;
            let miss = t.miss_rate();
            Ok(MissRow { p_in_dbm: p, snr_db: noise.snr_db(), miss, ci: wilson_interval(miss.hits, n, 1.96) })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdRow {
    pub threshold: f64,
    pub rate: Estimate,
}

/// Wake rate per comparator threshold while the 2-bit-wrong payload is sent.
pub fn false_alarm_curve(
    thresholds: &[f64],
    fmt: &PacketFormat,
    noise: &NoiseModel,
    osc: &OscillatorModel,
    n: u64,
    seed: u64,
) -> Result<Vec<ThresholdRow>> {
    let wrong = fmt.wrong_payload(2)?;
    detection_curve(thresholds, &wrong, noise, osc, n, seed)
}

/// Wake rate per comparator threshold.
pub fn detection_curve(
    thresholds: &[f64],
    fmt: &PacketFormat,
    noise: &NoiseModel,
    osc: &OscillatorModel,
    n: u64,
    seed: u64,
) -> Result<Vec<ThresholdRow>> {
    thresholds
        .iter()
        .map(|&th| {
            let t = packet_tally(fmt, noise, osc, th, n, seed)?;
            Ok(ThresholdRow { threshold: th, rate: t.wake_rate() })
        })
        .collect()
}

/// Noiseless trigger-to-wake time in seconds.
pub fn wake_latency(fmt: &PacketFormat, osc: &OscillatorModel) -> Option<f64> {
    let out = super::packet::run_receiver(&fmt.stream(), fmt, osc);
    out.wake_time.map(|t| t * osc.bit_period_s())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::q;

    #[test]
    fn high_and_low_power_limits() {
        let (fe, d, osc, fmt) = (FrontEndParams::default(), DiodeParams::table_i(), OscillatorModel::default(), PacketFormat::default());
        let rows = missed_detection_curve(&[-70.0, -30.0], &fmt, &fe, &d, &osc, 5000, 3).unwrap();
        assert_eq!(rows[1].miss.hits, 0);
        // At -70 dBm every decision is a coin flip and an exact 32-bit match
        // is out of reach.
        assert!(rows[0].miss.p_hat > 0.999);
    }

    #[test]
    fn miss_rate_falls_with_power() {
        let (fe, d, osc, fmt) = (FrontEndParams::default(), DiodeParams::table_i(), OscillatorModel::default(), PacketFormat::default());
        let grid = [-60.0, -58.0, -56.0, -54.0, -52.0, -50.0];
        let rows = missed_detection_curve(&grid, &fmt, &fe, &d, &osc, 4000, 5).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].miss.p_hat <= w[0].miss.p_hat + 2.0 * w[0].miss.std_err.max(w[1].miss.std_err));
        }
    }

    #[test]
    fn payload_ber_matches_bit_decisions() {
        // Ideal clock; only captures that start on the payload's first bit.
        let fmt = PacketFormat::default();
        let noise = NoiseModel::from_snr_db(15.0).unwrap();
        let osc = OscillatorModel::default();
        let first = (fmt.lead_in + 8) as usize;
        let (errors, captured) = (0..100_000u64)
            .into_par_iter()
            .map(|i| {
                let o = simulate_packet(&fmt, &noise, &osc, 0.5, &mut trial_rng(11, stream::PACKET, i));
                if o.payload_start == Some(first) { (o.bit_errors as u64, 1u64) } else { (0, 0) }
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        let p = q(0.5 / noise.sigma());
        let bits = (captured * 32) as f64;
        let se = (p * (1.0 - p) / bits).sqrt();
        let ber = errors as f64 / bits;
        assert!((ber - p).abs() < 3.0 * se, "{ber} vs {p}");
    }

    #[test]
    fn noiseless_false_alarms_are_zero() {
        let quiet = NoiseModel::from_sigma(1e-9).unwrap();
        let rows = false_alarm_curve(&[0.1, 0.3, 0.5, 0.7, 0.9], &PacketFormat::default(), &quiet, &OscillatorModel::default(), 500, 0).unwrap();
        assert!(rows.iter().all(|r| r.rate.hits == 0));
    }

    #[test]
    fn latency_is_200_us() {
        assert_eq!(wake_latency(&PacketFormat::default(), &OscillatorModel::default()), Some(200e-6));
    }

    #[test]
    fn thread_count_does_not_change_tallies() {
        let fmt = PacketFormat::default();
        let noise = NoiseModel::from_snr_db(12.0).unwrap();
        let osc = OscillatorModel::default().with_error(0.03).unwrap();
        let a = packet_tally(&fmt, &noise, &osc, 0.5, 3000, 9).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| packet_tally(&fmt, &noise, &osc, 0.5, 3000, 9).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn wilson_contains_estimate() {
        let (lo, hi) = wilson_interval(5, 1000, 1.96);
        assert!(lo < 0.005 && 0.005 < hi);
        assert_eq!(wilson_interval(0, 100, 1.96).0, 0.0);
    }
}
