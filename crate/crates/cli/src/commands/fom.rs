use clap::Args;
use wurx::analysis::fom::{check_comparison_table, fom, normalized_sensitivity, FomInputs};

use crate::config::Settings;
use crate::output::Table;
use crate::{CliError, Common};

#[derive(Args, Debug)]
pub struct FomArgs {
    #[command(flatten)]
    pub common: Common,
    /// Add a row for a design with this sensitivity (dBm); needs --rate and --power.
    #[arg(long, allow_negative_numbers = true)]
    pub sensitivity: Option<f64>,
    /// Data rate in bit/s.
    #[arg(long)]
    pub rate: Option<f64>,
    /// Power in watts.
    #[arg(long)]
    pub power: Option<f64>,
}

pub const HEADER: [&str; 8] = [
    "design", "data_rate_bps", "sensitivity_dbm", "power_w", "energy_per_bit_pj", "normalized_published_db", "normalized_db", "fom_db",
];

pub fn run(a: FomArgs) -> Result<(), CliError> {
    let mut s = Settings::load(a.common.config.as_deref())?;
    let out = s.opt("out", a.common.out)?;
    let custom = (s.opt("sensitivity", a.sensitivity)?, s.opt("rate", a.rate)?, s.opt("power", a.power)?);
    s.finish()?;

    let mut t = Table::new(&HEADER);
    for c in check_comparison_table() {
        let d = c.design;
        let epb = d.power_w / d.data_rate_bps;
        t.push(vec![
            d.name.to_string(),
            format!("{}", d.data_rate_bps),
            format!("{}", d.sensitivity_dbm),
            format!("{:e}", d.power_w),
            format!("{:.3}", epb * 1e12),
            format!("{:.2}", d.normalized_sensitivity_db),
            format!("{:.2}", c.recomputed_db),
            format!("{:.2}", wurx::analysis::fom::fom_from_parts(c.recomputed_db, epb)),
        ]);
    }
    match custom {
        (None, None, None) => {}
        (Some(sens), Some(rate), Some(power)) => {
            let f = FomInputs::new(sens, rate, power)?;
            t.push(vec![
                "custom".to_string(),
                format!("{rate}"),
                format!("{sens}"),
                format!("{power:e}"),
                format!("{:.3}", f.energy_per_bit() * 1e12),
                String::new(),
                format!("{:.2}", normalized_sensitivity(sens, rate)?),
                format!("{:.2}", fom(&f)),
            ]);
        }
        _ => return Err(CliError::Usage("--sensitivity, --rate and --power go together".into())),
    }
    t.emit(out.as_deref())
}
