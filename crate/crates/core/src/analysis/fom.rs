//! Bandwidth-normalised sensitivity and the energy-per-bit figure of merit.

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FomInputs {
    pub sensitivity_dbm: f64,
    pub data_rate_bps: f64,
    pub power_w: f64,
}

impl FomInputs {
    pub fn new(sensitivity_dbm: f64, data_rate_bps: f64, power_w: f64) -> Result<Self> {
        if !(data_rate_bps > 0.0) || !(power_w > 0.0) {
            return domain("data rate and power must be positive");
        }
        if !sensitivity_dbm.is_finite() {
            return domain("sensitivity must be finite");
        }
        Ok(Self {
            sensitivity_dbm,
            data_rate_bps,
            power_w,
        })
    }

    /// Joules per bit.
    pub fn energy_per_bit(&self) -> f64 {
        self.power_w / self.data_rate_bps
    }
}

/// `P_SEN - 5 log10(BW_BB)`: a square-law detector's output noise scales
/// with the square root of the baseband bandwidth.
pub fn normalized_sensitivity(sensitivity_dbm: f64, bw_bb_hz: f64) -> Result<f64> {
    if !(bw_bb_hz > 0.0) {
        return domain(format!("baseband bandwidth must be positive, got {bw_bb_hz}"));
    }
    Ok(sensitivity_dbm - 5.0 * bw_bb_hz.log10())
}

/// `-P_SEN,nor - 10 log10(E/bit)` with the baseband bandwidth taken as the
/// data rate.
pub fn fom(inputs: &FomInputs) -> f64 {
    let nor = inputs.sensitivity_dbm - 5.0 * inputs.data_rate_bps.log10();
    fom_from_parts(nor, inputs.energy_per_bit())
}

pub fn fom_from_parts(normalized_sensitivity_db: f64, energy_per_bit_j: f64) -> f64 {
    -normalized_sensitivity_db - 10.0 * energy_per_bit_j.log10()
}

/// One published design from the comparison table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublishedDesign {
    pub name: &'static str,
    pub data_rate_bps: f64,
    pub sensitivity_dbm: f64,
    pub normalized_sensitivity_db: f64,
    pub power_w: f64,
    pub energy_per_bit_pj: f64,
}

pub const COMPARISON_TABLE: [PublishedDesign; 7] = [
    PublishedDesign { name: "TCAS-I20", data_rate_bps: 2e3, sensitivity_dbm: -46.0, normalized_sensitivity_db: -64.49, power_w: 0.036e-6, energy_per_bit_pj: 18.0 },
    PublishedDesign { name: "JSSC16", data_rate_bps: 10e3, sensitivity_dbm: -97.0, normalized_sensitivity_db: -136.0, power_w: 99e-6, energy_per_bit_pj: 9900.0 },
    PublishedDesign { name: "JSSC19", data_rate_bps: 0.2e3, sensitivity_dbm: -76.0, normalized_sensitivity_db: -87.5, power_w: 0.0074e-6, energy_per_bit_pj: 37.0 },
    PublishedDesign { name: "JSSC18", data_rate_bps: 0.3e3, sensitivity_dbm: -69.0, normalized_sensitivity_db: -81.4, power_w: 0.004e-6, energy_per_bit_pj: 15.0 },
    PublishedDesign { name: "CICC12", data_rate_bps: 12.5e3, sensitivity_dbm: -45.0, normalized_sensitivity_db: -65.5, power_w: 0.116e-6, energy_per_bit_pj: 9.3 },
    PublishedDesign { name: "TCAS-I17", data_rate_bps: 200e3, sensitivity_dbm: -50.0, normalized_sensitivity_db: -76.5, power_w: 4.5e-6, energy_per_bit_pj: 22.5 },
    PublishedDesign { name: "This work", data_rate_bps: 200e3, sensitivity_dbm: -50.0, normalized_sensitivity_db: -76.5, power_w: 1.69e-6, energy_per_bit_pj: 8.45 },
];

/// Recomputed normalised sensitivity for one table row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableCheck {
    pub design: PublishedDesign,
    pub recomputed_db: f64,
    pub delta_db: f64,
    pub fom_db: f64,
}

pub fn check_comparison_table() -> Vec<TableCheck> {
    COMPARISON_TABLE
        .iter()
        .map(|d| {
            let recomputed_db = normalized_sensitivity(d.sensitivity_dbm, d.data_rate_bps).expect("positive rate");
            TableCheck {
                design: *d,
                recomputed_db,
                delta_db: recomputed_db - d.normalized_sensitivity_db,
                fom_db: fom_from_parts(recomputed_db, d.energy_per_bit_pj * 1e-12),
            }
        })
        .collect()
}
