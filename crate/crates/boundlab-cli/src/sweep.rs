//! Sweeping one parameter over a value list, with power-law summaries.
//!
//! After all runs finish, each metric is averaged across seeds at every
//! axis point and, when the result is a positive series over a numeric
//! axis, fitted as value ~ C * axis^p in log-log space. The fit lands
//! in two aggregate rows per metric, `slope:<name>` and `r2:<name>`,
//! with m = 0 and seed = 0 marking them as summaries rather than runs.

use std::collections::BTreeMap;

use boundlab::numerics::fit_loglog_slope;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{CliError, Result};
use crate::experiments::run_experiment;
use crate::output::SweepRow;

/// Run `base` once per value of `axis`, concatenate the rows, and
/// append slope summaries.
pub fn sweep(base: &ExperimentConfig, axis: &str, values: &[String]) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(CliError::BadParameter {
            key: "values".to_string(),
            message: "sweep needs at least one axis value".to_string(),
        });
    }
    if !base.experiment.allowed_keys().contains(&axis) {
        return Err(CliError::BadAxis {
            experiment: base.experiment.name(),
            axis: axis.to_string(),
        });
    }

    let mut rows = Vec::new();
    let mut runs: Vec<(Option<f64>, Vec<SweepRow>)> = Vec::new();
    for value in values {
        let mut cfg = base.clone();
        cfg.set(axis, value.clone());
        let run_rows = run_experiment(&cfg)?;
        let numeric = value.parse::<f64>().ok().filter(|v| v.is_finite() && *v > 0.0);
        runs.push((numeric, run_rows.clone()));
        rows.extend(run_rows);
    }

    rows.extend(slope_rows(base.experiment, base.config_hash(), &runs));
    Ok(rows)
}

/// Mean each metric across seeds per axis point, then fit the metrics
/// whose means stay strictly positive. Fitting silently skips an axis
/// that is not numeric everywhere and metrics a fit cannot accept;
/// everything else would turn a categorical sweep into an error.
fn slope_rows(
    experiment: Experiment,
    config_hash: u64,
    runs: &[(Option<f64>, Vec<SweepRow>)],
) -> Vec<SweepRow> {
    if runs.len() < 2 || runs.iter().any(|(x, _)| x.is_none()) {
        return Vec::new();
    }

    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for (x, run_rows) in runs {
        let x = x.expect("checked above");
        let mut sums: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
        for row in run_rows {
            let entry = sums.entry(row.metric.as_str()).or_insert((0.0, 0));
            entry.0 += row.value;
            entry.1 += 1;
        }
        for (metric, (sum, count)) in sums {
            series
                .entry(metric.to_string())
                .or_default()
                .push((x, sum / count as f64));
        }
    }

    let mut out = Vec::new();
    let n_points = runs.len();
    for (metric, points) in series {
        if points.len() != n_points {
            continue;
        }
        let Ok(fit) = fit_loglog_slope(&points) else {
            continue;
        };
        for (prefix, value) in [("slope", fit.exponent), ("r2", fit.r_squared)] {
            out.push(SweepRow {
                experiment: experiment.name().to_string(),
                m: 0,
                seed: 0,
                metric: format!("{prefix}:{metric}"),
                value,
                std_err: None,
                config_hash,
            });
        }
    }
    out
}

/// The bounds-sweep experiment: the trained-network driver repeated
/// over a list of sample sizes, relabeled so its rows group under one
/// experiment name.
pub(crate) fn run_bounds_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let m_values = cfg.get_str("m_values", "1024,2048,4096,8192,16384");
    let values: Vec<String> = m_values
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if values.is_empty() {
        return Err(CliError::BadParameter {
            key: "m_values".to_string(),
            message: "expected a comma-separated list of sample sizes".to_string(),
        });
    }

    let mut base = cfg.clone();
    base.experiment = Experiment::ReluHypersphere;
    base.params.remove("m_values");

    let hash = cfg.config_hash();
    let mut rows = sweep(&base, "m", &values)?;
    for row in &mut rows {
        row.experiment = cfg.experiment.name().to_string();
        row.config_hash = hash;
    }
    Ok(rows)
}
