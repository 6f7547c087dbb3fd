//! Experiment selection and flat key=value configuration.
//!
//! A config file is a sequence of `key = value` lines; `#` starts a
//! comment and blank lines are skipped. Three keys are reserved for
//! the harness itself (`experiment`, `seeds`, `out`) and everything
//! else lands in the parameter map, whose legal contents depend on the
//! chosen experiment. Command-line flags are applied on top of the
//! file by the binary, so the file holds defaults and flags hold
//! overrides.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::error::{CliError, Result};

/// Which driver [`crate::experiments::run_experiment`] dispatches to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    /// High-dimensional linear task with a noise-negated companion set.
    Linear,
    /// Exponential-unit network with a signal-negated companion set.
    ExpNet,
    /// Trained two-layer ReLU net on concentric hyperspheres.
    ReluHypersphere,
    /// Table-lookup memorizer over a simple base rule.
    Abstract,
    /// ReLU runs repeated over a list of sample sizes, with slope fits.
    BoundsSweep,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Linear => "linear",
            Experiment::ExpNet => "expnet",
            Experiment::ReluHypersphere => "relu-hypersphere",
            Experiment::Abstract => "abstract",
            Experiment::BoundsSweep => "bounds-sweep",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "linear" => Ok(Experiment::Linear),
            "expnet" => Ok(Experiment::ExpNet),
            "relu-hypersphere" => Ok(Experiment::ReluHypersphere),
            "abstract" => Ok(Experiment::Abstract),
            "bounds-sweep" => Ok(Experiment::BoundsSweep),
            other => Err(CliError::UnknownExperiment(other.to_string())),
        }
    }

    /// Parameter keys this experiment accepts. Anything else in the
    /// map is a schema violation reported before any work starts.
    pub fn allowed_keys(self) -> &'static [&'static str] {
        const LINEAR: &[&str] = &["m", "eps", "delta", "gamma", "n_test", "mode", "noise_dim"];
        const EXPNET: &[&str] = &["m", "eps", "delta", "n_test", "dim"];
        const RELU: &[&str] = &[
            "dim",
            "width",
            "m",
            "learning_rate",
            "batch_size",
            "stop_fraction",
            "stop_margin",
            "max_epochs",
            "loss",
            "n_test",
            "init_scale",
            "r_inner",
            "r_outer",
            "snapshot_out",
        ];
        const ABSTRACT: &[&str] = &["dim", "m", "n_test"];
        const SWEEP: &[&str] = &[
            "dim",
            "width",
            "m_values",
            "learning_rate",
            "batch_size",
            "stop_fraction",
            "stop_margin",
            "max_epochs",
            "loss",
            "n_test",
            "init_scale",
            "r_inner",
            "r_outer",
        ];
        match self {
            Experiment::Linear => LINEAR,
            Experiment::ExpNet => EXPNET,
            Experiment::ReluHypersphere => RELU,
            Experiment::Abstract => ABSTRACT,
            Experiment::BoundsSweep => SWEEP,
        }
    }
}

/// A fully resolved run request: experiment, parameters, seeds, and
/// where the CSV should go (`None` means stdout).
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub params: BTreeMap<String, String>,
    pub seeds: Vec<u64>,
    pub output_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            params: BTreeMap::new(),
            seeds: vec![1],
            output_path: None,
        }
    }

    /// Parse a config file body. The `experiment` key is required
    /// unless the caller already fixed the experiment, in which case a
    /// conflicting value is an error.
    pub fn from_text(text: &str, fixed: Option<Experiment>) -> Result<Self> {
        let mut experiment = fixed;
        let mut params = BTreeMap::new();
        let mut seeds = None;
        let mut output_path = None;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| CliError::Config {
                line: line_no,
                message: format!("expected key = value, got {line:?}"),
            })?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || value.is_empty() {
                return Err(CliError::Config {
                    line: line_no,
                    message: "empty key or value".to_string(),
                });
            }
            match key {
                "experiment" => {
                    let parsed = Experiment::parse(value)?;
                    if let Some(fixed) = fixed {
                        if fixed != parsed {
                            return Err(CliError::Config {
                                line: line_no,
                                message: format!(
                                    "config says experiment = {} but the subcommand is {}",
                                    parsed.name(),
                                    fixed.name()
                                ),
                            });
                        }
                    }
                    experiment = Some(parsed);
                }
                "seeds" => {
                    seeds = Some(parse_seed_list(value).map_err(|message| CliError::Config {
                        line: line_no,
                        message,
                    })?);
                }
                "out" => output_path = Some(PathBuf::from(value)),
                _ => {
                    if params.insert(key.to_string(), value.to_string()).is_some() {
                        return Err(CliError::Config {
                            line: line_no,
                            message: format!("duplicate key {key:?}"),
                        });
                    }
                }
            }
        }

        let experiment = experiment.ok_or_else(|| CliError::Config {
            line: 0,
            message: "missing required key \"experiment\"".to_string(),
        })?;
        Ok(ExperimentConfig {
            experiment,
            params,
            seeds: seeds.unwrap_or_else(|| vec![1]),
            output_path,
        })
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.params.insert(key.to_string(), value.into());
    }

    /// Reject any parameter key the experiment's schema does not list.
    pub fn validate_keys(&self) -> Result<()> {
        let allowed = self.experiment.allowed_keys();
        for key in self.params.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(CliError::UnknownParameter {
                    experiment: self.experiment.name(),
                    key: key.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn get_str(&self, key: &str, default: &str) -> String {
        self.params.get(key).cloned().unwrap_or_else(|| default.to_string())
    }

    pub fn get_usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.params.get(key) {
            None => Ok(default),
            Some(raw) => raw.parse().map_err(|_| CliError::BadParameter {
                key: key.to_string(),
                message: format!("expected a non-negative integer, got {raw:?}"),
            }),
        }
    }

    pub fn get_f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(raw) => match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(CliError::BadParameter {
                    key: key.to_string(),
                    message: format!("expected a finite number, got {raw:?}"),
                }),
            },
        }
    }

    /// FNV-1a over the canonical form: experiment name, sorted
    /// parameters, then seeds. The output path is deliberately
    /// excluded so moving a result file does not change provenance.
    pub fn config_hash(&self) -> u64 {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                hash ^= u64::from(b);
                hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(self.experiment.name().as_bytes());
        eat(b"\n");
        for (key, value) in &self.params {
            eat(key.as_bytes());
            eat(b"=");
            eat(value.as_bytes());
            eat(b"\n");
        }
        for seed in &self.seeds {
            eat(&seed.to_le_bytes());
        }
        hash
    }
}

/// Comma-separated seed list, or `first..=last` for a dense range.
pub fn parse_seed_list(raw: &str) -> std::result::Result<Vec<u64>, String> {
    if let Some((lo, hi)) = raw.split_once("..=") {
        let lo: u64 = lo.trim().parse().map_err(|_| format!("bad range start {lo:?}"))?;
        let hi: u64 = hi.trim().parse().map_err(|_| format!("bad range end {hi:?}"))?;
        if lo > hi {
            return Err(format!("empty seed range {raw:?}"));
        }
        return Ok((lo..=hi).collect());
    }
    let seeds: std::result::Result<Vec<u64>, String> = raw
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| format!("bad seed {s:?}")))
        .collect();
    let seeds = seeds?;
    if seeds.is_empty() {
        return Err("no seeds given".to_string());
    }
    Ok(seeds)
}
