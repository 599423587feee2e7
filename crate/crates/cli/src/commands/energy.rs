use std::io::Write;
use std::str::FromStr;

use clap::Args;
use wurx::analysis::energy::{min_pd_per_tx, optimize_energy_with, EnergyGrid, EnergyObjective, EnergyParams};
use wurx::detectors::{DetectionStats, DetectorKind};
use wurx::model::{NoiseModel, Priors, Signature};

use crate::config::Settings;
use crate::output::{prob, Table};
use crate::{CliError, Common};

#[derive(Args, Debug)]
pub struct EnergyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Required probability that one of `q` transmissions wakes the receiver.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Transmissions per wake-up attempt.
    #[arg(long)]
    pub q: Option<u32>,
    /// served (default) or literal.
    #[arg(long)]
    pub objective: Option<Objective>,
    /// Transceiver wake energy over one ED decision.
    #[arg(long)]
    pub rx_ratio: Option<f64>,
    #[arg(long)]
    pub signature: Option<String>,
    #[arg(long)]
    pub grid_step: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct Objective(EnergyObjective);

impl FromStr for Objective {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "served" => Ok(Self(EnergyObjective::ServedWakeups)),
            "literal" => Ok(Self(EnergyObjective::Literal)),
            _ => Err(format!("unknown objective {s}; expected served or literal")),
        }
    }
}

pub const HEADER: [&str; 8] = ["snr_db", "design", "lambda", "l", "p_fa", "p_d", "e_wurx_j", "energy_j"];

pub fn run(a: EnergyArgs) -> Result<(), CliError> {
    let mut s = Settings::load(a.common.config.as_deref())?;
    let out = s.opt("out", a.common.out)?;
    let snrs = s.list("snr", a.common.snr, vec![6.0, 10.0, 15.0, 20.0])?;
    let gamma = s.value("gamma", a.gamma, 0.99)?;
    let q = s.value("q", a.q, 5)?;
    let objective = s.value("objective", a.objective, Objective(EnergyObjective::ServedWakeups))?.0;
    let ratio = s.value("rx-ratio", a.rx_ratio, wurx::analysis::energy::GOLDEN_RX_RATIO)?;
    let sig: Signature = s.value("signature", a.signature, "10011010".to_string())?.parse()?;
    let step = s.value("grid-step", a.grid_step, 0.1)?;
    s.finish()?;
    if !(step > 0.0 && step <= 1.0) {
        return Err(CliError::Usage(format!("grid step {step} outside (0, 1]")));
    }

    let pd_min = min_pd_per_tx(gamma, q)?;
    // Golden first- and second-phase energies with a selectable transceiver ratio.
    let energies = EnergyParams::from_powers(1.48e-6, 0.2e-6, 200e-6, ratio)?;
    let priors = Priors::default();
    let mut table = Table::new(&HEADER);
    let mut summary = vec![format!("pd_min,{pd_min:.6}")];
    for &snr in &snrs {
        let noise = NoiseModel::from_snr_db(snr)?;
        let mut e = [0.0; 2];
        for (slot, (kind, name)) in [(DetectorKind::Ed, "ed"), (DetectorKind::Corr, "two_phase")].into_iter().enumerate() {
            let grid = EnergyGrid::with_step(kind, &sig, step);
            let opt = optimize_energy_with(kind, &sig, &noise, &priors, &energies, pd_min, &grid, objective)?;
            e[slot] = opt.energy;
            table.push(vec![
                format!("{snr}"),
                name.to_string(),
                format!("{}", opt.params.lambda),
                opt.params.l.to_string(),
                prob(opt.stats.p_fa),
                prob(opt.stats.p_d),
                prob(opt.e_wurx),
                prob(opt.energy),
            ]);
        }
        // No false alarms, certain detection, first phase only.
        let ideal = DetectionStats::new(0.0, 1.0)?;
        let bound = objective.evaluate(&ideal, &priors, &energies, energies.e_ed);
        table.push(vec![
            format!("{snr}"),
            "bound".to_string(),
            String::new(),
            String::new(),
            prob(0.0),
            prob(1.0),
            prob(energies.e_ed),
            prob(bound),
        ]);
        summary.push(format!("energy_ratio_ed_over_two_phase,{snr},{:.4}", e[0] / e[1]));
    }
    table.emit(out.as_deref())?;
    let text = summary.join("\n") + "\n";
    if out.is_some() {
        std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
    } else {
        eprint!("{text}");
        Ok(())
    }
}
