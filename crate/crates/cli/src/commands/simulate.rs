use std::str::FromStr;

use clap::Args;
use wurx::model::NoiseModel;
use wurx::rx_sim::curves::{detection_curve, false_alarm_curve, missed_detection_curve, wake_latency};
use wurx::rx_sim::interferer::{interferer_sim, sir_tolerance, InterfererKind, TOLERANCE_SUCCESS};
use wurx::rx_sim::{input_power_to_snr, DiodeParams, FrontEndParams, OscillatorModel, PacketFormat};

use super::roc::checked_grid;
use crate::config::{Count, Settings};
use crate::output::{prob, write_bytes, Table};
use crate::{CliError, Common};

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    /// missed-detection, false-alarm, detection, interferer or latency.
    #[arg(long)]
    pub mode: Option<Mode>,
    /// Comma-separated input powers in dBm.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub power: Vec<f64>,
    /// Comparator threshold as a fraction of the one-level.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Comma-separated thresholds for the false-alarm and detection sweeps.
    #[arg(long, value_delimiter = ',')]
    pub thresholds: Vec<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub freq_error: Option<f64>,
    #[arg(long)]
    pub lock_gain: Option<f64>,
    /// cw or am.
    #[arg(long)]
    pub interferer: Option<String>,
    #[arg(long)]
    pub offset: Option<f64>,
    /// Comma-separated SIRs in dB.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub sir: Vec<f64>,
    #[arg(long)]
    pub depth: Option<f64>,
    #[arg(long)]
    pub mod_hz: Option<f64>,
    #[arg(long)]
    pub amp_bandwidth: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    MissedDetection,
    FalseAlarm,
    Detection,
    Interferer,
    Latency,
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "missed-detection" => Self::MissedDetection,
            "false-alarm" => Self::FalseAlarm,
            "detection" => Self::Detection,
            "interferer" => Self::Interferer,
            "latency" => Self::Latency,
            _ => return Err(format!("unknown mode {s}")),
        })
    }
}

pub fn run(a: SimulateArgs) -> Result<(), CliError> {
    let mut s = Settings::load(a.common.config.as_deref())?;
    let mode = s
        .opt("mode", a.mode)?
        .ok_or_else(|| CliError::Usage("--mode is required".into()))?;
    let seed = s.value("seed", a.common.seed, 0)?;
    let out = s.opt("out", a.common.out)?;
    let trials = s.opt("trials", a.common.trials.map(Count))?.map(|c| c.0);
    let threshold = s.value("threshold", a.threshold, 0.5)?;
    let freq_error = s.value("freq-error", a.freq_error, 0.0)?;
    let lock_gain = s.value("lock-gain", a.lock_gain, OscillatorModel::default().lock_gain)?;
    let mut fe = FrontEndParams::default().with_threshold(threshold)?;
    if let Some(b) = s.opt("amp-bandwidth", a.amp_bandwidth)? {
        fe = fe.with_amp_bandwidth(b)?;
    }
    let osc = OscillatorModel::new(200e3, freq_error, lock_gain)?;
    let diode = DiodeParams::table_i();
    let fmt = PacketFormat::default();

    match mode {
        Mode::Latency => {
            s.finish()?;
            let t = wake_latency(&fmt, &osc).ok_or_else(|| CliError::Usage("noiseless packet did not wake".into()))?;
            write_bytes(format!("wake_latency_us,{:.1}\n", t * 1e6).as_bytes(), out.as_deref())
        }
        Mode::MissedDetection => {
            let powers = s.list("power", a.power, checked_grid(-60.0, -40.0, 1.0)?)?;
            s.finish()?;
            let mut t = Table::new(&["p_in_dbm", "snr_db", "packets", "missed", "miss_rate", "ci_low", "ci_high"]);
            for r in missed_detection_curve(&powers, &fmt, &fe, &diode, &osc, trials.unwrap_or(100_000), seed)? {
                t.push(vec![
                    format!("{}", r.p_in_dbm),
                    format!("{:.6}", r.snr_db),
                    r.miss.n.to_string(),
                    r.miss.hits.to_string(),
                    prob(r.miss.p_hat),
                    prob(r.ci.0),
                    prob(r.ci.1),
                ]);
            }
            t.emit(out.as_deref())
        }
        Mode::FalseAlarm | Mode::Detection => {
            let power = s.list("power", a.power, vec![-50.0])?;
            let ths = s.list("thresholds", a.thresholds, checked_grid(0.05, 0.95, 0.05)?)?;
            s.finish()?;
            let &[p_in] = power.as_slice() else {
                return Err(CliError::Usage("threshold sweeps take a single --power".into()));
            };
            let noise: NoiseModel = input_power_to_snr(p_in, &fe, &diode)?;
            let n = trials.unwrap_or(1_000_000);
            let (rows, col) = if mode == Mode::FalseAlarm {
                (false_alarm_curve(&ths, &fmt, &noise, &osc, n, seed)?, "p_fa")
            } else {
                (detection_curve(&ths, &fmt, &noise, &osc, n, seed)?, "p_d")
            };
            let mut t = Table::new(&["threshold", "packets", "wakes", col]);
            for r in rows {
                t.push(vec![format!("{}", r.threshold), r.rate.n.to_string(), r.rate.hits.to_string(), prob(r.rate.p_hat)]);
            }
            t.emit(out.as_deref())
        }
        Mode::Interferer => {
            let name = s.value("interferer", a.interferer, "cw".to_string())?;
            let offset = s.value("offset", a.offset, 10e6)?;
            let depth = s.value("depth", a.depth, 0.05)?;
            let mod_hz = s.value("mod-hz", a.mod_hz, 400e3)?;
            let sirs = s.list("sir", a.sir, wurx::rx_sim::interferer::default_sir_grid())?;
            let power = s.list("power", a.power, vec![wurx::rx_sim::interferer::INTERFERER_POWER_DBM])?;
            s.finish()?;
            let kind = match name.as_str() {
                "cw" => InterfererKind::Cw,
                "am" => InterfererKind::Am { depth, mod_hz },
                _ => return Err(CliError::Usage(format!("unknown interferer {name}; expected cw or am"))),
            };
            let &[p_in] = power.as_slice() else {
                return Err(CliError::Usage("interferer runs take a single --power".into()));
            };
            let rows = interferer_sim(kind, offset, &sirs, &fmt, &fe, &diode, &osc, p_in, trials.unwrap_or(2000), seed)?;
            let mut t = Table::new(&["sir_db", "success"]);
            for r in &rows {
                t.push(vec![format!("{}", r.sir_db), prob(r.success)]);
            }
            match sir_tolerance(&rows, TOLERANCE_SUCCESS) {
                Some(tol) => eprintln!("sir_tolerance_db,{tol}"),
                None => eprintln!("sir_tolerance_db,"),
            }
            t.emit(out.as_deref())
        }
    }
}
