//! Error type shared across the library.
//!
//! The split follows the usual contract: malformed *values* flowing
//! through an otherwise correct program (empty inputs, dimension
//! mismatches, out-of-range parameters, iteration limits) surface as
//! `Err`; violated *structural* invariants that only a coding mistake
//! can produce (a label outside {-1,+1} smuggled past a constructor)
//! panic via assertions at the construction site.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    #[error("parameter out of range: {0}")]
    BadParameter(String),

    #[error("power iteration did not converge within {iterations} iterations (best estimate {best_estimate})")]
    NoConvergence { iterations: usize, best_estimate: f64 },

    #[error("sample size m={m} too small: the high-probability argument needs m > {required:.3}")]
    SampleTooSmall { m: usize, required: f64 },

    #[error("non-finite value encountered during training at epoch {epoch}, batch {batch}")]
    NonFiniteTraining { epoch: usize, batch: usize },

    #[error("point is not on either sphere: |x| = {norm} (radii {r_inner} / {r_outer})")]
    NotOnSphere { norm: f64, r_inner: f64, r_outer: f64 },

    #[error("snapshot format error: {0}")]
    SnapshotFormat(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
