use std::fmt::Write as _;
use std::str::FromStr;

use clap::Args;
use wurx::validation::{run as run_checks, Fault, ValidationConfig};

use crate::config::{Count, Settings};
use crate::output::write_bytes;
use crate::{CliError, Common};

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Negative control: none or duplicated-kernel.
    #[arg(long)]
    pub fault: Option<FaultArg>,
}

#[derive(Debug, Clone, Copy)]
pub struct FaultArg(Fault);

impl FromStr for FaultArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(Self(Fault::None)),
            "duplicated-kernel" => Ok(Self(Fault::DuplicatedKernel)),
            _ => Err(format!("unknown fault {s}")),
        }
    }
}

pub fn run(a: ValidateArgs) -> Result<(), CliError> {
    let mut s = Settings::load(a.common.config.as_deref())?;
    let defaults = ValidationConfig::default();
    let cfg = ValidationConfig {
        trials: s.value("trials", a.common.trials.map(Count), Count(defaults.trials))?.0,
        seed: s.value("seed", a.common.seed, defaults.seed)?,
        snrs_db: s.list("snr", a.common.snr, defaults.snrs_db.clone())?,
        fault: s.value("fault", a.fault, FaultArg(Fault::None))?.0,
        ..defaults
    };
    let out = s.opt("out", a.common.out)?;
    s.finish()?;

    let report = run_checks(&cfg)?;
    let mut text = String::new();
    for c in &report.checks {
        let _ = writeln!(text, "{} {:.4} {}", if c.passed() { "PASS" } else { "FAIL" }, c.margin, c.name);
    }
    let failed = report.failures().count();
    let _ = writeln!(text, "summary: {} checks, {failed} failed, worst margin {:.4}", report.checks.len(), report.worst().map_or(0.0, |c| c.margin));
    write_bytes(text.as_bytes(), out.as_deref())?;
    if failed > 0 {
        return Err(CliError::Validation(format!("{failed} checks outside their bands")));
    }
    Ok(())
}
