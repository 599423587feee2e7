//! Schottky front-end calculators and the input-power to baseband-SNR map.

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::model::{q, NoiseModel};

/// Thermal voltage at 300 K.
pub const V_T: f64 = 25.85e-3;

/// Conversion gain at DC the diode model is calibrated to, V/W.
pub const GAMMA0: f64 = 660.0;

/// Small-signal Schottky diode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiodeParams {
    pub r_x: f64,
    pub c_j: f64,
    pub i_s: f64,
    pub i_d: f64,
    pub n_ideality: f64,
    pub v_t: f64,
    /// Technology constant in `gamma0 = K / (2 (I_D + I_S))`.
    pub k_conv: f64,
}

impl DiodeParams {
    pub fn new(r_x: f64, c_j: f64, i_s: f64, i_d: f64, n_ideality: f64, v_t: f64, k_conv: f64) -> Result<Self> {
        for (name, v) in [("r_x", r_x), ("c_j", c_j), ("i_s", i_s), ("i_d", i_d), ("v_t", v_t), ("k_conv", k_conv)] {
            if !(v > 0.0) || !v.is_finite() {
                return domain(format!("{name} must be positive, got {v}"));
            }
        }
        if !(n_ideality >= 1.0) {
            return domain(format!("ideality factor must be >= 1, got {n_ideality}"));
        }
        Ok(Self { r_x, c_j, i_s, i_d, n_ideality, v_t, k_conv })
    }

    /// R_X = 380 ohm, C_J = 8 fF, I_S = 0.95 uA, I_D = 1.6 uA, N = 1.35,
    /// with `K` set so that `gamma0 = 660`.
    pub fn table_i() -> Self {
        let (i_s, i_d) = (0.95e-6, 1.6e-6);
        Self::new(380.0, 8e-15, i_s, i_d, 1.35, V_T, GAMMA0 * 2.0 * (i_d + i_s)).expect("valid constants")
    }

    pub fn gamma0(&self) -> f64 {
        self.k_conv / (2.0 * (self.i_d + self.i_s))
    }

    /// Dynamic junction resistance `N V_T / (I_D + I_S)`.
    pub fn r_j(&self) -> f64 {
        self.n_ideality * self.v_t / (self.i_d + self.i_s)
    }
}

/// `gamma0 / (1 + w^2 C_J^2 (R_X || R_J)^2)`
pub fn gamma_eff(diode: &DiodeParams, f_rf: f64) -> f64 {
    let (rx, rj) = (diode.r_x, diode.r_j());
    let r = rx * rj / (rx + rj);
    let w = 2.0 * PI * f_rf;
    diode.gamma0() / (1.0 + (w * diode.c_j * r).powi(2))
}

/// `G_md / C_J` in hertz, `G_md = I_D / (N V_T)`.
pub fn diode_bandwidth(diode: &DiodeParams) -> f64 {
    let g_md = diode.i_d / (diode.n_ideality * diode.v_t);
    g_md / diode.c_j / (2.0 * PI)
}

/// `NF = 1 + N_o / (N_s G_P^2)`
pub fn noise_figure_sd(n_o_sd: f64, n_s: f64, g_p: f64) -> Result<f64> {
    if !(n_s > 0.0) || !(g_p > 0.0) || !(n_o_sd >= 0.0) {
        return domain("noise powers must be non-negative and N_s, G_P positive");
    }
    Ok(1.0 + n_o_sd / (n_s * g_p * g_p))
}

/// Shot and thermal noise current densities of the front end, A^2/Hz.
pub const SHOT_NOISE_A2_HZ: f64 = 5.12e-18;
pub const THERMAL_NOISE_A2_HZ: f64 = 4.4e-23;

/// Normalised per-bit noise at the reference point that gives a packet
/// missed-detection probability of 1e-3 (see [`calibrate_reference_sigma`]).
pub const REFERENCE_SIGMA: f64 = 0.123_288_965_074_374_53;

/// Input power the noise calibration is anchored at.
pub const REFERENCE_POWER_DBM: f64 = -50.0;

/// Packet-level target at the reference power.
pub const REFERENCE_MISS: f64 = 1e-3;

/// Baseband amplifier -3 dB bandwidth, fitted once so the CW interferer
/// tolerance at 10 MHz offset is -16 dB SIR (see `interferer`).
pub const AMP_BANDWIDTH_HZ: f64 = 430e3;

/// Front end from antenna to comparator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontEndParams {
    pub carrier_hz: f64,
    pub passive_gain_db: f64,
    /// Low-frequency conversion gain, V/W; the diode roll-off is applied on top.
    pub gamma0: f64,
    /// Noise power at the detector output in V^2, referred to the same node as
    /// the detected signal. A free calibration constant.
    pub amp_input_noise: f64,
    /// Comparator threshold as a fraction of the detected one-level.
    pub threshold_v: f64,
    /// Baseband amplifier bandwidth, first-order roll-off.
    pub amp_bandwidth_hz: f64,
    /// Loaded quality factor of the input band-pass network.
    pub bpf_q: f64,
}

impl FrontEndParams {
    pub fn new(carrier_hz: f64, passive_gain_db: f64, gamma0: f64, amp_input_noise: f64, threshold_v: f64) -> Result<Self> {
        if !passive_gain_db.is_finite() {
            return domain("passive gain must be finite");
        }
        if !(gamma0 > 0.0) {
            return domain(format!("gamma0 must be positive, got {gamma0}"));
        }
        if !(carrier_hz > 0.0) || !(amp_input_noise > 0.0) {
            return domain("carrier and noise must be positive");
        }
        if !(0.0..=1.0).contains(&threshold_v) {
            return domain(format!("threshold fraction {threshold_v} outside [0, 1]"));
        }
        Ok(Self {
            carrier_hz,
            passive_gain_db,
            gamma0,
            amp_input_noise,
            threshold_v,
            amp_bandwidth_hz: AMP_BANDWIDTH_HZ,
            bpf_q: 25.0,
        })
    }

    pub fn with_amp_bandwidth(self, hz: f64) -> Result<Self> {
        if !(hz > 0.0) {
            return domain("amplifier bandwidth must be positive");
        }
        Ok(Self { amp_bandwidth_hz: hz, ..self })
    }

    pub fn with_threshold(self, threshold_v: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&threshold_v) {
            return domain(format!("threshold fraction {threshold_v} outside [0, 1]"));
        }
        Ok(Self { threshold_v, ..self })
    }

    /// Detected one-level in volts for an input power.
    pub fn detected_amplitude(&self, diode: &DiodeParams, p_in_dbm: f64) -> f64 {
        let p_w = 1e-3 * 10f64.powf((p_in_dbm + self.passive_gain_db) / 10.0);
        self.gamma0 * gamma_eff(diode, self.carrier_hz) / diode.gamma0() * p_w
    }
}

impl Default for FrontEndParams {
    /// 750 MHz carrier, 13 dB passive gain, mid-supply threshold, noise
    /// calibrated at the reference point.
    fn default() -> Self {
        let diode = DiodeParams::table_i();
        let mut fe = Self::new(750e6, 13.0, GAMMA0, 1.0, 0.5).expect("valid constants");
        fe.amp_input_noise = (REFERENCE_SIGMA * fe.detected_amplitude(&diode, REFERENCE_POWER_DBM)).powi(2);
        fe
    }
}

/// Square-law map: the detected amplitude is proportional to input power, so
/// `+6 dB` in gives four times the amplitude and `+12 dB` of baseband SNR.
pub fn input_power_to_snr(p_in_dbm: f64, fe: &FrontEndParams, diode: &DiodeParams) -> Result<NoiseModel> {
    if !p_in_dbm.is_finite() {
        return domain("input power must be finite");
    }
    NoiseModel::from_sigma(fe.amp_input_noise.sqrt() / fe.detected_amplitude(diode, p_in_dbm))
}

/// Ideal-clock packet miss probability: every one of `bits` decisions must be
/// right at a mid-level threshold.
pub fn ideal_packet_miss(sigma: f64, bits: u32) -> f64 {
    let p = q(0.5 / sigma);
    -(bits as f64 * (-p).ln_1p()).exp_m1()
}

/// Per-bit noise that gives `target` ideal-clock miss probability on a
/// `bits`-bit packet, by bisection.
pub fn calibrate_reference_sigma(target: f64, bits: u32) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return domain("target miss probability must lie in (0, 1)");
    }
    let (mut lo, mut hi) = (1e-3, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ideal_packet_miss(mid, bits) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `1 / sqrt(1 + (f / f_c)^2)`
pub fn first_order_gain(f: f64, f_c: f64) -> f64 {
    1.0 / (1.0 + (f / f_c).powi(2)).sqrt()
}

/// Power transmission of a single resonator at `offset` from `f0`.
pub fn resonator_power_gain(offset: f64, f0: f64, q_loaded: f64) -> f64 {
    1.0 / (1.0 + (2.0 * q_loaded * offset / f0).powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dc_gain_is_anchor() {
        let d = DiodeParams::table_i();
        assert!((gamma_eff(&d, 0.0) - 660.0).abs() < 1e-9);
        assert!(gamma_eff(&d, 1e17) < 1e-6);
        let g = gamma_eff(&d, 750e6);
        assert!(g > 0.5 * 660.0 && g < 660.0);
    }

    #[test]
    fn bandwidth_near_one_gigahertz() {
        let d = DiodeParams::table_i();
        let bw = diode_bandwidth(&d);
        assert!((bw / 1e9 - 1.0).abs() < 0.15, "{bw}");
        let wide = DiodeParams { c_j: 2.0 * d.c_j, ..d };
        assert!((diode_bandwidth(&wide) / bw - 0.5).abs() < 1e-12);
        let hot = DiodeParams { i_d: 2.0 * d.i_d, ..d };
        assert!((diode_bandwidth(&hot) / bw - 2.0).abs() < 1e-12);
    }

    #[test]
    fn monotone_on_log_grid() {
        let d = DiodeParams::table_i();
        let freqs: Vec<f64> = (0..60).map(|k| 10f64.powf(6.0 + k as f64 * 0.08)).collect();
        assert!(freqs.windows(2).all(|w| gamma_eff(&d, w[1]) < gamma_eff(&d, w[0])));
        let caps: Vec<f64> = (0..40).map(|k| 1e-15 * 10f64.powf(k as f64 * 0.05)).collect();
        assert!(caps.windows(2).all(|w| {
            diode_bandwidth(&DiodeParams { c_j: w[1], ..d }) < diode_bandwidth(&DiodeParams { c_j: w[0], ..d })
        }));
    }

    #[test]
    fn noise_figure() {
        assert_eq!(noise_figure_sd(0.0, 1.0, 3.0).unwrap(), 1.0);
        let a = noise_figure_sd(2.0, 1.0, 1.0).unwrap() - 1.0;
        let b = noise_figure_sd(2.0, 1.0, 2.0).unwrap() - 1.0;
        assert!((a / b - 4.0).abs() < 1e-12);
        let ratio = SHOT_NOISE_A2_HZ / THERMAL_NOISE_A2_HZ;
        assert!((ratio / 1.16e5 - 1.0).abs() < 0.01);
        assert!(noise_figure_sd(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn square_law_scaling() {
        let d = DiodeParams::table_i();
        let fe = FrontEndParams::default();
        let a = input_power_to_snr(-50.0, &fe, &d).unwrap();
        let b = input_power_to_snr(-44.0, &fe, &d).unwrap();
        assert!((b.snr_db() - a.snr_db() - 12.0).abs() < 0.01);
        let ratio = fe.detected_amplitude(&d, -44.0) / fe.detected_amplitude(&d, -50.0);
        assert!((ratio - 10f64.powf(0.6)).abs() < 1e-12);
        assert!((a.sigma() - REFERENCE_SIGMA).abs() < 1e-12);
    }

    #[test]
    fn frozen_calibration_reproduces() {
        let s = calibrate_reference_sigma(REFERENCE_MISS, 40).unwrap();
        assert!((s / REFERENCE_SIGMA - 1.0).abs() < 1e-9, "{s:.17}");
        assert!((ideal_packet_miss(s, 40) - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn filters() {
        assert!((resonator_power_gain(10e6, 750e6, 25.0) - 1.0 / (1.0 + 4.0 / 9.0)).abs() < 1e-12);
        assert!((first_order_gain(1.0, 1.0) - 0.5f64.sqrt()).abs() < 1e-15);
    }
}
