//! Per-trial result record shared by the synthetic experiments.

/// Outcome of one train/evaluate cycle of a learner, with everything
/// needed to certify a generalization/bad-set gap downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    /// Training-set loss (same loss family as `test_loss`).
    pub train_loss: f64,
    /// Monte Carlo estimate of the loss on fresh draws.
    pub test_loss: f64,
    /// Standard error of `test_loss`.
    pub test_std_err: f64,
    /// Loss on the adversarially re-labeled or re-noised companion set.
    pub bad_set_loss: f64,
    /// |test_loss - bad_set_loss|: the per-trial certificate that the
    /// learned predictor treats the companion set unlike fresh data.
    pub witness: f64,
    /// l2 norm of the learned weight vector, when the model has one.
    pub weight_norm: Option<f64>,
    /// l2 norm of the noise-block weights alone (linear task only).
    pub noise_weight_norm: Option<f64>,
    /// Margin level the losses were evaluated at (0 = plain 0-1).
    pub gamma: f64,
    /// Training-set size.
    pub m: usize,
    /// Noise/ambient dimension of the task.
    pub dim: usize,
}
