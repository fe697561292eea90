//! Output formatting.
//!
//! CSV files start with `#` comment lines: the command, the seed, any
//! command-level summary values, then the full resolved config as TOML.
//! Floats use Rust's shortest round-trip representation, and dB columns hold
//! `10 log10(x)` or the string `-inf` when `x <= 0`. Nothing time-dependent is
//! written, so reruns are byte-identical.

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const NEG_INF_DB: &str = "-inf";

pub fn to_db(linear: f64) -> String {
    if linear > 0.0 && linear.is_finite() {
        num(10.0 * linear.log10())
    } else {
        NEG_INF_DB.to_string()
    }
}

/// Inverse of [`to_db`]; `-inf` maps to 0.
pub fn from_db(db: &str) -> Option<f64> {
    if db == NEG_INF_DB {
        return Some(0.0);
    }
    db.parse::<f64>().ok().map(|v| 10f64.powf(v / 10.0))
}

pub fn num(v: f64) -> String {
    format!("{v}")
}

pub struct CsvTable {
    command: &'static str,
    summary: Vec<(String, String)>,
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(command: &'static str, columns: &[&'static str]) -> Self {
        Self { command, summary: Vec::new(), columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn summary(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.to_string(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, cfg: &ExperimentConfig) -> Result<String, CliError> {
        let mut out = format!("# irs-stealth {}\n# seed = {}\n", self.command, cfg.seed);
        for (k, v) in &self.summary {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        out.push_str("# config:\n");
        for line in cfg.to_toml().lines() {
            if line.is_empty() {
                out.push_str("#\n");
            } else {
                out.push_str(&format!("#   {line}\n"));
            }
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Internal(format!("csv: {e}"));
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        let body = w.into_inner().map_err(|e| CliError::Internal(format!("csv: {e}")))?;
        out.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
        Ok(out)
    }
}
