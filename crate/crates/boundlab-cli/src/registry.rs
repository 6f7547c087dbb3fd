//! The closed list of metric names the harness may emit.
//!
//! Every CSV row's metric must appear here (or be a `slope:`/`r2:`
//! aggregate of a name that does), so downstream tooling can rely on
//! spelling and meaning never drifting.

#[derive(Debug, Clone, Copy)]
pub struct MetricInfo {
    pub name: &'static str,
    pub units: &'static str,
    pub describes: &'static str,
}

pub const METRICS: &[MetricInfo] = &[
    MetricInfo {
        name: "train_error",
        units: "fraction in [0,1]",
        describes: "mean loss on the training set at the experiment's loss level",
    },
    MetricInfo {
        name: "test_error",
        units: "fraction in [0,1]",
        describes: "Monte Carlo mean loss on fresh draws; std_err column populated",
    },
    MetricInfo {
        name: "bad_set_error",
        units: "fraction in [0,1]",
        describes: "mean loss on the constructed companion set (noise-negated, sign-flipped, or radius-swapped)",
    },
    MetricInfo {
        name: "witness",
        units: "fraction in [0,1]",
        describes: "absolute difference between test_error and bad_set_error",
    },
    MetricInfo {
        name: "weight_norm",
        units: "l2 norm",
        describes: "norm of the trained linear weight vector",
    },
    MetricInfo {
        name: "noise_weight_norm",
        units: "l2 norm",
        describes: "norm of the noise block of the trained linear weights",
    },
    MetricInfo {
        name: "noise_dim",
        units: "count",
        describes: "noise dimension D the linear trial actually used",
    },
    MetricInfo {
        name: "block_dim",
        units: "count",
        describes: "per-block dimension D the exponential-unit trial actually used",
    },
    MetricInfo {
        name: "theorem_regime",
        units: "flag 0/1",
        describes: "whether the dimensions met the certified thresholds",
    },
    MetricInfo {
        name: "swap_error",
        units: "fraction in [0,1]",
        describes: "0-1 error on the radius-swapped training set",
    },
    MetricInfo {
        name: "epochs",
        units: "count",
        describes: "training epochs actually run",
    },
    MetricInfo {
        name: "converged",
        units: "flag 0/1",
        describes: "whether the margin stopping rule fired before max_epochs",
    },
    MetricInfo {
        name: "margin_p1",
        units: "logit difference",
        describes: "1st-percentile training margin",
    },
    MetricInfo {
        name: "margin_median",
        units: "logit difference",
        describes: "median training margin",
    },
    MetricInfo {
        name: "mean_train_margin",
        units: "logit difference",
        describes: "mean margin over the training set",
    },
    MetricInfo {
        name: "mean_test_margin",
        units: "logit difference",
        describes: "mean margin over fresh test draws",
    },
    MetricInfo {
        name: "pseudo_overfit_gap",
        units: "logit difference",
        describes: "mean train margin minus mean test margin",
    },
    MetricInfo {
        name: "dist_from_init",
        units: "l2 norm",
        describes: "distance of the trained parameters from their initialization",
    },
    MetricInfo {
        name: "dist_from_origin",
        units: "l2 norm",
        describes: "norm of the trained parameter vector",
    },
    MetricInfo {
        name: "spectral_product",
        units: "dimensionless",
        describes: "product of per-layer spectral norms",
    },
    MetricInfo {
        name: "bound_neyshabur18",
        units: "dimensionless",
        describes: "spectral-product bound with Frobenius-ratio distance, leading constant 1",
    },
    MetricInfo {
        name: "bound_bartlett17",
        units: "dimensionless",
        describes: "spectral-product bound with (2,1)-ratio distance, leading constant 1",
    },
    MetricInfo {
        name: "bound_two_layer19",
        units: "dimensionless",
        describes: "width-aware two-layer bound, leading constant 1",
    },
    MetricInfo {
        name: "input_norm_cap",
        units: "l2 norm",
        describes: "largest training input norm, the B plugged into the bounds",
    },
];

/// Look a metric up, accepting the `slope:` and `r2:` aggregate forms
/// that sweeps append for any base metric.
pub fn lookup(metric: &str) -> Option<&'static MetricInfo> {
    let base = metric.strip_prefix("slope:").or_else(|| metric.strip_prefix("r2:")).unwrap_or(metric);
    METRICS.iter().find(|m| m.name == base)
}
