//! Per-experiment drivers: resolve parameters, run one trial per seed,
//! and flatten the results into registry-checked rows.
//!
//! Seed-to-stream layout is fixed so the same (config, seed) pair is
//! reproducible everywhere: the closed-form tasks consume a single
//! stream `(seed, 0)`, and the trained ReLU task splits into streams
//! `(seed, 0)` for training data, `(seed, 1)` for initialization,
//! `(seed, 2)` for batch shuffling and `(seed, 3)` for test data.

use boundlab::audit::{compute_bounds_net, margin_stats, max_input_norm, run_abstract_trial};
use boundlab::expnet::{run_trial_exp, ExpTaskConfig};
use boundlab::linear::{run_trial, BoundConstants, LinearTaskConfig};
use boundlab::losses::LossKind;
use boundlab::numerics::RngStream;
use boundlab::relu::{
    evaluate_error, project_swap, sample_hypersphere, train_sgd, HypersphereConfig, TrainConfig,
    TrainLoss, TwoLayerNet,
};
use boundlab::TrialReport;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{CliError, Result};
use crate::output::SweepRow;

/// Collects rows for one (experiment, m, seed) slot.
pub(crate) struct Sink {
    experiment: &'static str,
    m: usize,
    seed: u64,
    config_hash: u64,
    pub(crate) rows: Vec<SweepRow>,
}

impl Sink {
    fn new(cfg: &ExperimentConfig, m: usize, seed: u64) -> Self {
        Sink {
            experiment: cfg.experiment.name(),
            m,
            seed,
            config_hash: cfg.config_hash(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, metric: &str, value: f64) {
        self.rows.push(SweepRow {
            experiment: self.experiment.to_string(),
            m: self.m,
            seed: self.seed,
            metric: metric.to_string(),
            value,
            std_err: None,
            config_hash: self.config_hash,
        });
    }

    fn push_with_err(&mut self, metric: &str, value: f64, std_err: f64) {
        self.push(metric, value);
        self.rows.last_mut().expect("just pushed").std_err = Some(std_err);
    }

    fn push_report(&mut self, report: &TrialReport) {
        self.push("train_error", report.train_loss);
        self.push_with_err("test_error", report.test_loss, report.test_std_err);
        self.push("bad_set_error", report.bad_set_loss);
        self.push("witness", report.witness);
        if let Some(w) = report.weight_norm {
            self.push("weight_norm", w);
        }
        if let Some(w) = report.noise_weight_norm {
            self.push("noise_weight_norm", w);
        }
    }
}

/// Run the configured experiment once per seed and return its rows.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    cfg.validate_keys()?;
    if cfg.seeds.is_empty() {
        return Err(CliError::BadParameter {
            key: "seeds".to_string(),
            message: "at least one seed is required".to_string(),
        });
    }
    match cfg.experiment {
        Experiment::Linear => run_linear(cfg),
        Experiment::ExpNet => run_expnet(cfg),
        Experiment::ReluHypersphere => run_relu(cfg),
        Experiment::Abstract => run_abstract(cfg),
        Experiment::BoundsSweep => crate::sweep::run_bounds_sweep(cfg),
    }
}

fn run_linear(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let m = cfg.get_usize("m", 100)?;
    let eps = cfg.get_f64("eps", 0.05)?;
    let delta = cfg.get_f64("delta", 0.05)?;
    let gamma = cfg.get_f64("gamma", 1.0)?;
    let n_test = cfg.get_usize("n_test", 10_000)?;
    let mode = cfg.get_str("mode", "empirical");

    let task = match mode.as_str() {
        "theorem" => LinearTaskConfig::theorem(m, eps, delta, &BoundConstants::loose())?,
        "empirical" => LinearTaskConfig::empirical(m, eps, delta)?,
        "fixed" => {
            let noise_dim = cfg.get_usize("noise_dim", 0)?;
            if noise_dim == 0 {
                return Err(CliError::BadParameter {
                    key: "noise_dim".to_string(),
                    message: "mode = fixed requires a positive noise_dim".to_string(),
                });
            }
            LinearTaskConfig::with_noise_dim(m, noise_dim, eps, delta)?
        }
        other => {
            return Err(CliError::BadParameter {
                key: "mode".to_string(),
                message: format!("expected theorem, empirical, or fixed, got {other:?}"),
            })
        }
    };
    if mode != "fixed" && cfg.params.contains_key("noise_dim") {
        return Err(CliError::BadParameter {
            key: "noise_dim".to_string(),
            message: "only meaningful with mode = fixed".to_string(),
        });
    }

    let mut rows = Vec::new();
    for &seed in &cfg.seeds {
        let report = run_trial(&task, n_test, gamma, RngStream::new(seed, 0))?;
        let mut sink = Sink::new(cfg, m, seed);
        sink.push_report(&report);
        sink.push("noise_dim", task.noise_dim as f64);
        sink.push("theorem_regime", if task.theorem_regime { 1.0 } else { 0.0 });
        rows.extend(sink.rows);
    }
    Ok(rows)
}

fn run_expnet(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let m = cfg.get_usize("m", 32)?;
    let eps = cfg.get_f64("eps", 0.05)?;
    let delta = cfg.get_f64("delta", 0.05)?;
    let n_test = cfg.get_usize("n_test", 2_000)?;

    let task = match cfg.params.get("dim") {
        Some(_) => {
            let dim = cfg.get_usize("dim", 0)?;
            ExpTaskConfig::with_dim(m, dim, eps, delta)?
        }
        None => ExpTaskConfig::theorem(m, eps, delta, &BoundConstants::tight())?,
    };

    let mut rows = Vec::new();
    for &seed in &cfg.seeds {
        let report = run_trial_exp(&task, n_test, RngStream::new(seed, 0))?;
        let mut sink = Sink::new(cfg, m, seed);
        sink.push_report(&report);
        sink.push("block_dim", task.dim as f64);
        sink.push("theorem_regime", if task.theorem_regime { 1.0 } else { 0.0 });
        rows.extend(sink.rows);
    }
    Ok(rows)
}

fn run_abstract(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let dim = cfg.get_usize("dim", 16)?;
    let m = cfg.get_usize("m", 100)?;
    let n_test = cfg.get_usize("n_test", 100_000)?;

    let mut rows = Vec::new();
    for &seed in &cfg.seeds {
        let report = run_abstract_trial(dim, m, n_test, RngStream::new(seed, 0))?;
        let mut sink = Sink::new(cfg, m, seed);
        sink.push_report(&report);
        rows.extend(sink.rows);
    }
    Ok(rows)
}

/// Resolved parameters for one trained-network run; shared by the plain
/// experiment and the sample-size sweep.
pub(crate) struct ReluParams {
    pub dim: usize,
    pub width: usize,
    pub m: usize,
    pub n_test: usize,
    pub init_scale: f64,
    pub sphere: HypersphereConfig,
    pub train_cfg: TrainConfig,
    pub snapshot_out: Option<String>,
}

pub(crate) fn relu_params(cfg: &ExperimentConfig) -> Result<ReluParams> {
    let dim = cfg.get_usize("dim", 256)?;
    let width = cfg.get_usize("width", 8192)?;
    let m = cfg.get_usize("m", 4096)?;
    let n_test = cfg.get_usize("n_test", 2_000)?;
    let init_scale = cfg.get_f64("init_scale", 1.0)?;
    let r_inner = cfg.get_f64("r_inner", 1.0)?;
    let r_outer = cfg.get_f64("r_outer", 1.1)?;
    let sphere = HypersphereConfig::new(dim, r_inner, r_outer)?;

    let loss = match cfg.get_str("loss", "cross_entropy").as_str() {
        "cross_entropy" => TrainLoss::CrossEntropy,
        "squared" => TrainLoss::SquaredError,
        other => {
            return Err(CliError::BadParameter {
                key: "loss".to_string(),
                message: format!("expected cross_entropy or squared, got {other:?}"),
            })
        }
    };
    let train_cfg = TrainConfig {
        learning_rate: cfg.get_f64("learning_rate", 0.1)?,
        batch_size: cfg.get_usize("batch_size", 64)?,
        stop_fraction: cfg.get_f64("stop_fraction", 0.99)?,
        stop_margin: cfg.get_f64("stop_margin", 10.0)?,
        max_epochs: cfg.get_usize("max_epochs", 300)?,
        loss,
    };
    train_cfg.validate()?;

    Ok(ReluParams {
        dim,
        width,
        m,
        n_test,
        init_scale,
        sphere,
        train_cfg,
        snapshot_out: cfg.params.get("snapshot_out").cloned(),
    })
}

fn bernoulli_std_err(p: f64, n: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let n = n as f64;
    ((p * (1.0 - p)) * n / (n - 1.0) / n).sqrt()
}

fn run_relu(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let params = relu_params(cfg)?;
    let mut rows = Vec::new();
    for &seed in &cfg.seeds {
        let sink = run_relu_seed(cfg, &params, seed)?;
        rows.extend(sink.rows);
    }
    Ok(rows)
}

pub(crate) fn run_relu_seed(
    cfg: &ExperimentConfig,
    params: &ReluParams,
    seed: u64,
) -> Result<Sink> {
    let train = sample_hypersphere(&params.sphere, params.m, RngStream::new(seed, 0))?;
    let test = sample_hypersphere(&params.sphere, params.n_test, RngStream::new(seed, 3))?;
    let net0 = TwoLayerNet::init(params.dim, params.width, params.init_scale, RngStream::new(seed, 1))?;
    let outcome = train_sgd(net0, &train, &params.train_cfg, RngStream::new(seed, 2))?;
    let net = outcome.net;

    if let Some(path) = &params.snapshot_out {
        let path = if cfg.seeds.len() == 1 {
            path.clone()
        } else {
            format!("{path}.seed{seed}")
        };
        net.save_snapshot(std::path::Path::new(&path))?;
    }

    let swap = project_swap(&train, &params.sphere)?;
    let train_err = evaluate_error(&net, &train, LossKind::ZeroOne)?;
    let test_err = evaluate_error(&net, &test, LossKind::ZeroOne)?;
    let swap_err = evaluate_error(&net, &swap, LossKind::ZeroOne)?;
    let stats = margin_stats(&net, &train, &test)?;

    let b = max_input_norm(&train);
    let gamma = if params.train_cfg.stop_margin > 0.0 {
        params.train_cfg.stop_margin
    } else {
        1.0
    };
    let bounds = compute_bounds_net(&net, b, gamma, params.m)?;

    let mut sink = Sink::new(cfg, params.m, seed);
    sink.push("train_error", train_err);
    sink.push_with_err("test_error", test_err, bernoulli_std_err(test_err, params.n_test));
    sink.push("swap_error", swap_err);
    sink.push("witness", (test_err - swap_err).abs());
    sink.push("epochs", outcome.epochs as f64);
    sink.push("converged", if outcome.converged { 1.0 } else { 0.0 });
    sink.push("margin_p1", stats.percentile_1);
    sink.push("margin_median", stats.median);
    sink.push("mean_train_margin", stats.mean_train);
    sink.push("mean_test_margin", stats.mean_test);
    sink.push("pseudo_overfit_gap", stats.pseudo_overfit_gap);
    sink.push("dist_from_init", net.dist_from_init());
    sink.push("dist_from_origin", net.dist_from_origin());
    sink.push("spectral_product", bounds.spectral_norms.iter().product());
    sink.push("bound_neyshabur18", bounds.bound_neyshabur18);
    sink.push("bound_bartlett17", bounds.bound_bartlett17);
    if let Some(v) = bounds.bound_two_layer19 {
        sink.push("bound_two_layer19", v);
    }
    sink.push("input_norm_cap", b);
    Ok(sink)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_abstract() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(Experiment::Abstract);
        cfg.set("dim", "4");
        cfg.set("m", "20");
        cfg.set("n_test", "200");
        cfg.seeds = vec![1, 2];
        cfg
    }

    #[test]
    fn abstract_driver_emits_one_row_block_per_seed() {
        let rows = run_experiment(&tiny_abstract()).unwrap();
        assert_eq!(rows.len(), 8);
        let per_seed: Vec<&SweepRow> = rows.iter().filter(|r| r.seed == 1).collect();
        let metrics: Vec<&str> = per_seed.iter().map(|r| r.metric.as_str()).collect();
        assert_eq!(metrics, ["train_error", "test_error", "bad_set_error", "witness"]);
        assert!(rows.iter().all(|r| r.experiment == "abstract" && r.m == 20));
    }

    #[test]
    fn memorizer_rows_carry_the_expected_values() {
        let rows = run_experiment(&tiny_abstract()).unwrap();
        for row in &rows {
            match row.metric.as_str() {
                "train_error" | "test_error" => assert_eq!(row.value, 0.0),
                "bad_set_error" | "witness" => assert_eq!(row.value, 1.0),
                other => panic!("unexpected metric {other}"),
            }
        }
    }

    #[test]
    fn unknown_parameter_is_rejected_before_running() {
        let mut cfg = tiny_abstract();
        cfg.set("learning_rate", "0.1");
        assert!(matches!(
            run_experiment(&cfg),
            Err(CliError::UnknownParameter { .. })
        ));
    }

    #[test]
    fn linear_driver_demo_scale_shows_the_gap() {
        let mut cfg = ExperimentConfig::new(Experiment::Linear);
        cfg.set("m", "40");
        cfg.set("mode", "fixed");
        cfg.set("noise_dim", "4000");
        cfg.set("eps", "0.35");
        cfg.set("delta", "0.2");
        cfg.set("n_test", "1000");
        cfg.seeds = vec![7];
        let rows = run_experiment(&cfg).unwrap();
        let get = |name: &str| {
            rows.iter()
                .find(|r| r.metric == name)
                .unwrap_or_else(|| panic!("missing {name}"))
                .value
        };
        assert_eq!(get("train_error"), 0.0);
        assert_eq!(get("bad_set_error"), 1.0);
        assert!(get("test_error") < 0.5);
        assert_eq!(get("noise_dim"), 4000.0);
        assert_eq!(get("theorem_regime"), 0.0);
        assert!(get("weight_norm") > 0.0);
        let test_row = rows.iter().find(|r| r.metric == "test_error").unwrap();
        assert!(test_row.std_err.is_some());
    }

    #[test]
    fn linear_driver_rejects_stray_noise_dim() {
        let mut cfg = ExperimentConfig::new(Experiment::Linear);
        cfg.set("noise_dim", "100");
        assert!(matches!(
            run_experiment(&cfg),
            Err(CliError::BadParameter { .. })
        ));
    }

    #[test]
    fn expnet_driver_demo_scale_shows_the_gap() {
        let mut cfg = ExperimentConfig::new(Experiment::ExpNet);
        cfg.set("m", "16");
        cfg.set("dim", "400");
        cfg.set("n_test", "64");
        cfg.seeds = vec![3];
        let rows = run_experiment(&cfg).unwrap();
        let get = |name: &str| rows.iter().find(|r| r.metric == name).unwrap().value;
        assert_eq!(get("train_error"), 0.0);
        assert_eq!(get("bad_set_error"), 1.0);
        assert_eq!(get("block_dim"), 400.0);
        assert_eq!(get("theorem_regime"), 0.0);
    }

    #[test]
    fn relu_driver_tiny_net_emits_the_full_metric_block() {
        let mut cfg = ExperimentConfig::new(Experiment::ReluHypersphere);
        cfg.set("dim", "4");
        cfg.set("width", "16");
        cfg.set("m", "64");
        cfg.set("n_test", "32");
        cfg.set("stop_margin", "0.05");
        cfg.set("max_epochs", "5");
        cfg.seeds = vec![1];
        let rows = run_experiment(&cfg).unwrap();
        for name in [
            "train_error",
            "test_error",
            "swap_error",
            "witness",
            "epochs",
            "converged",
            "margin_p1",
            "margin_median",
            "mean_train_margin",
            "mean_test_margin",
            "pseudo_overfit_gap",
            "dist_from_init",
            "dist_from_origin",
            "spectral_product",
            "bound_neyshabur18",
            "bound_bartlett17",
            "bound_two_layer19",
            "input_norm_cap",
        ] {
            assert!(
                rows.iter().any(|r| r.metric == name),
                "metric {name} missing from relu rows"
            );
        }
        let epochs = rows.iter().find(|r| r.metric == "epochs").unwrap().value;
        assert!((1.0..=5.0).contains(&epochs));
        let b = rows.iter().find(|r| r.metric == "input_norm_cap").unwrap().value;
        assert!(b > 1.0 && b < 1.1 + 1e-9);
    }

    #[test]
    fn same_config_and_seed_reproduce_identical_rows() {
        let cfg = tiny_abstract();
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a, b);
    }
}
