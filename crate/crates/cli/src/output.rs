//! CSV emission: one header row, `.` decimals, probabilities with nine
//! significant digits.

use std::io::Write;
use std::path::Path;

use crate::CliError;

pub fn prob(p: f64) -> String {
    format!("{p:.8e}")
}

pub fn opt_prob(p: Option<f64>) -> String {
    p.map(prob).unwrap_or_default()
}

pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }

    /// To `out`, or standard output.
    pub fn emit(&self, out: Option<&Path>) -> Result<(), CliError> {
        write_bytes(&self.to_bytes()?, out)
    }
}

pub fn write_bytes(bytes: &[u8], out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(bytes).map_err(|e| CliError::Io(e.to_string())),
    }
}
