use clap::Args;
use wurx::analysis::step_grid;
use wurx::analysis::sweep::sweep;
use wurx::detectors::DetectorKind;
use wurx::model::{NoiseModel, Priors, Signature};
use wurx::monte_carlo::{Hypothesis, TrialPlan};
use wurx::validation::grid_for;

use crate::config::{Count, Settings};
use crate::output::{opt_prob, prob, Table};
use crate::{CliError, Common};

#[derive(Args, Debug)]
pub struct RocArgs {
    #[command(flatten)]
    pub common: Common,
    /// `all` or a comma-separated list of ed, corr, ook-mf, bpsk-mf.
    #[arg(long, value_delimiter = ',')]
    pub detector: Vec<String>,
    #[arg(long)]
    pub signature: Option<String>,
    /// Threshold grid as fractions of each statistic's noiseless range (the
    /// threshold itself for ed and corr).
    #[arg(long, allow_negative_numbers = true)]
    pub grid_start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub grid_stop: Option<f64>,
    #[arg(long)]
    pub grid_step: Option<f64>,
}

pub const HEADER: [&str; 10] = [
    "detector", "snr_db", "lambda", "l", "p_fa_analytic", "p_d_analytic", "p_fa_mc", "p_d_mc", "mc_stderr_fa", "mc_stderr_d",
];

pub fn parse_detectors(names: &[String]) -> Result<Vec<DetectorKind>, CliError> {
    if names.iter().any(|n| n == "all") {
        return Ok(DetectorKind::ALL.to_vec());
    }
    names.iter().map(|n| n.parse::<DetectorKind>().map_err(CliError::from)).collect()
}

pub fn checked_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) || step <= 0.0 || start > stop {
        return Err(CliError::Usage(format!("invalid grid {start}:{step}:{stop}")));
    }
    if (stop - start) / step > 1e5 {
        return Err(CliError::Usage("grid has more than 1e5 points".into()));
    }
    Ok(step_grid(start, stop, step))
}

pub fn run(a: RocArgs) -> Result<(), CliError> {
    let mut s = Settings::load(a.common.config.as_deref())?;
    let seed = s.value("seed", a.common.seed, 0)?;
    let trials = s.value("trials", a.common.trials.map(Count), Count(100_000))?.0;
    let out = s.opt("out", a.common.out)?;
    let snrs = s.list("snr", a.common.snr, vec![6.0, 10.0, 15.0])?;
    let kinds = parse_detectors(&s.list("detector", a.detector, vec!["all".to_string()])?)?;
    let sig: Signature = s.value("signature", a.signature, "10011010".to_string())?.parse()?;
    let start = s.value("grid-start", a.grid_start, 0.0)?;
    let stop = s.value("grid-stop", a.grid_stop, 1.0)?;
    let step = s.value("grid-step", a.grid_step, 0.05)?;
    s.finish()?;

    let fracs = checked_grid(start, stop, step)?;
    let priors = Priors::default();
    let plan = match trials {
        0 => None,
        n => Some(TrialPlan::new(n, seed, Hypothesis::H1)?),
    };
    let mut table = Table::new(&HEADER);
    for kind in kinds {
        let lambdas: Vec<f64> = grid_for(kind, &sig, &fracs).iter().filter(|p| p.l == 0).map(|p| p.lambda).collect();
        let ls: Vec<u32> = match kind {
            DetectorKind::Corr => (0..=sig.len()).collect(),
            _ => vec![0],
        };
        for &snr in &snrs {
            let noise = NoiseModel::from_snr_db(snr)?;
            for r in sweep(kind, &sig, &noise, &priors, &ls, &lambdas, plan.as_ref())? {
                table.push(vec![
                    kind.name().to_string(),
                    format!("{snr}"),
                    format!("{}", r.lambda),
                    r.l.to_string(),
                    prob(r.p_fa),
                    prob(r.p_d),
                    opt_prob(r.mc.map(|m| m.p_fa)),
                    opt_prob(r.mc.map(|m| m.p_d)),
                    opt_prob(r.mc.map(|m| m.p_fa_se)),
                    opt_prob(r.mc.map(|m| m.p_d_se)),
                ]);
            }
        }
    }
    table.emit(out.as_deref())
}
