use thiserror::Error;

/// Everything that can go wrong between a config file and a CSV on disk.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("unknown experiment {0:?} (expected linear, expnet, relu-hypersphere, abstract, or bounds-sweep)")]
    UnknownExperiment(String),

    #[error("{experiment}: unknown parameter {key:?}")]
    UnknownParameter { experiment: &'static str, key: String },

    #[error("parameter {key:?}: {message}")]
    BadParameter { key: String, message: String },

    #[error("metric {0:?} is not in the registry")]
    UnknownMetric(String),

    #[error("sweep axis {axis:?} is not a parameter of {experiment}")]
    BadAxis { experiment: &'static str, axis: String },

    #[error(transparent)]
    Lab(#[from] boundlab::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
