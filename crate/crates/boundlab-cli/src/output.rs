//! CSV emission. One row per (seed, metric); aggregate slope rows use
//! sentinel coordinates so they sort after nothing in particular but
//! stay machine-findable.

use std::fs;
use std::path::Path;

use crate::error::{CliError, Result};
use crate::registry;

/// A single measurement. `config_hash` ties the row to the exact
/// configuration that produced it; it travels in memory only and is
/// not a CSV column, so files from configs differing only in hash
/// remain byte-comparable.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub experiment: String,
    pub m: usize,
    pub seed: u64,
    pub metric: String,
    pub value: f64,
    pub std_err: Option<f64>,
    pub config_hash: u64,
}

pub const CSV_HEADER: &str = "experiment,m,seed,metric,value,std_err";

/// Render rows as CSV text, sorted by (experiment, m, seed, metric).
/// Values are printed with 17 significant digits so re-parsing
/// round-trips every f64 exactly. Unknown metrics are rejected rather
/// than silently written.
pub fn csv_string(rows: &[SweepRow]) -> Result<String> {
    for row in rows {
        if registry::lookup(&row.metric).is_none() {
            return Err(CliError::UnknownMetric(row.metric.clone()));
        }
    }
    let mut sorted: Vec<&SweepRow> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        (a.experiment.as_str(), a.m, a.seed, a.metric.as_str())
            .cmp(&(b.experiment.as_str(), b.m, b.seed, b.metric.as_str()))
    });

    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in sorted {
        let std_err = match row.std_err {
            Some(e) => format!("{e:.16e}"),
            None => String::new(),
        };
        out.push_str(&format!(
            "{},{},{},{},{:.16e},{}\n",
            row.experiment, row.m, row.seed, row.metric, row.value, std_err
        ));
    }
    Ok(out)
}

/// Write the CSV to `path`, creating parent directories as needed.
pub fn emit_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let text = csv_string(rows)?;
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, text)?;
    Ok(())
}
