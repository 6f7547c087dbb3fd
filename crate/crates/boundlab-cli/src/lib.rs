//! Command-line harness around the bound laboratory: flat key=value
//! configs, per-seed experiment dispatch, parameter sweeps with
//! power-law summaries, and deterministic CSV output.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod registry;
pub mod sweep;

pub use config::{parse_seed_list, Experiment, ExperimentConfig};
pub use error::{CliError, Result};
pub use experiments::run_experiment;
pub use output::{csv_string, emit_csv, SweepRow, CSV_HEADER};
pub use sweep::sweep;
