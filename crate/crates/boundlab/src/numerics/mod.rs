//! Deterministic numerical kernels: dense matrices with the norms the
//! capacity bounds need, reproducible random streams, and log-domain
//! scalar arithmetic. Everything else in the library builds on this
//! module; nothing here knows about learning tasks.

mod matrix;
mod rng;
mod scalar;

pub use matrix::{axpy, dot, Matrix};
pub use rng::{random_sign, sample_gaussian, standard_normal, RngStream};
pub use scalar::{fit_loglog_slope, logsumexp, signed_log_diff, SlopeFit};

/// Default relative tolerance for spectral-norm power iteration.
pub const SPECTRAL_TOL: f64 = 1e-9;
/// Default iteration budget for spectral-norm power iteration.
pub const SPECTRAL_MAX_ITER: usize = 10_000;
