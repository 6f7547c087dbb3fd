use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use boundlab::audit::compute_bounds_net;
use boundlab::relu::TwoLayerNet;
use boundlab_cli::{
    csv_string, emit_csv, parse_seed_list, run_experiment, sweep::sweep, CliError, Experiment,
    ExperimentConfig, Result, SweepRow,
};

/// Numerical laboratory for norm- and algorithm-dependent
/// generalization bounds.
#[derive(Parser)]
#[command(name = "boundlab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// High-dimensional linear task with a noise-negated companion set.
    Linear(RunArgs),
    /// Exponential-unit network with a signal-negated companion set.
    Expnet(RunArgs),
    /// Two-layer ReLU net trained on concentric hyperspheres.
    Relu(RunArgs),
    /// Table-lookup memorizer over a first-coordinate base rule.
    Abstract(RunArgs),
    /// Sweep one parameter over a value list and fit power laws.
    Sweep(SweepArgs),
    /// Evaluate the norm-based bounds on a saved network snapshot.
    BoundsReport(BoundsReportArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Config file of key = value lines (# comments allowed).
    #[arg(long)]
    config: Option<PathBuf>,

    /// Seeds to run: a comma list like "3,5,8" or a range "1..=20".
    #[arg(long)]
    seed: Option<String>,

    /// Shorthand for --seed 1..=N. Rejected when --seed is also given.
    #[arg(long)]
    trials: Option<u64>,

    /// Training-set size override.
    #[arg(long)]
    m: Option<usize>,

    /// Extra parameter overrides, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Where to write the CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Base experiment to sweep (required unless the config names one).
    #[arg(long)]
    experiment: Option<String>,

    /// Parameter to vary.
    #[arg(long, default_value = "m")]
    axis: String,

    /// Comma-separated axis values.
    #[arg(long)]
    values: String,

    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct BoundsReportArgs {
    /// Network snapshot produced by a relu run's snapshot_out.
    #[arg(long)]
    snapshot: PathBuf,

    /// Margin level the bounds are evaluated at.
    #[arg(long)]
    gamma: f64,

    /// Training-set size the network was fitted on.
    #[arg(long)]
    m: usize,

    /// Input-norm cap B (largest training input norm).
    #[arg(long)]
    b: f64,
}

fn build_config(experiment: Option<Experiment>, args: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            ExperimentConfig::from_text(&text, experiment)?
        }
        None => match experiment {
            Some(exp) => ExperimentConfig::new(exp),
            None => {
                return Err(CliError::BadParameter {
                    key: "experiment".to_string(),
                    message: "no subcommand experiment and no config file".to_string(),
                })
            }
        },
    };

    for pair in &args.set {
        let (key, value) = pair.split_once('=').ok_or_else(|| CliError::BadParameter {
            key: pair.clone(),
            message: "expected KEY=VALUE".to_string(),
        })?;
        cfg.set(key.trim(), value.trim().to_string());
    }
    if let Some(m) = args.m {
        cfg.set("m", m.to_string());
    }

    match (&args.seed, args.trials) {
        (Some(_), Some(_)) => {
            return Err(CliError::BadParameter {
                key: "trials".to_string(),
                message: "give either --seed or --trials, not both".to_string(),
            })
        }
        (Some(list), None) => {
            cfg.seeds = parse_seed_list(list).map_err(|message| CliError::BadParameter {
                key: "seed".to_string(),
                message,
            })?;
        }
        (None, Some(n)) => {
            if n == 0 {
                return Err(CliError::BadParameter {
                    key: "trials".to_string(),
                    message: "at least one trial is required".to_string(),
                });
            }
            cfg.seeds = (1..=n).collect();
        }
        (None, None) => {}
    }

    if args.out.is_some() {
        cfg.output_path = args.out.clone();
    }
    Ok(cfg)
}

fn deliver(rows: &[SweepRow], cfg: &ExperimentConfig) -> Result<()> {
    match &cfg.output_path {
        Some(path) => {
            emit_csv(rows, path)?;
            println!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => print!("{}", csv_string(rows)?),
    }
    Ok(())
}

fn run_simple(experiment: Experiment, args: &RunArgs) -> Result<()> {
    let cfg = build_config(Some(experiment), args)?;
    let rows = run_experiment(&cfg)?;
    deliver(&rows, &cfg)
}

fn run_sweep(args: &SweepArgs) -> Result<()> {
    let experiment = match &args.experiment {
        Some(name) => Some(Experiment::parse(name)?),
        None => None,
    };
    let cfg = build_config(experiment, &args.run)?;
    let values: Vec<String> = args
        .values
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    let rows = sweep(&cfg, &args.axis, &values)?;
    deliver(&rows, &cfg)
}

fn run_bounds_report(args: &BoundsReportArgs) -> Result<()> {
    let net = TwoLayerNet::load_snapshot(&args.snapshot)?;
    let report = compute_bounds_net(&net, args.b, args.gamma, args.m)?;
    println!("layers = {}", report.spectral_norms.len());
    println!("m = {}", report.m);
    println!("gamma_used = {}", report.gamma_used);
    println!("b_used = {}", report.b_used);
    for (i, v) in report.spectral_norms.iter().enumerate() {
        println!("spectral_norm[{i}] = {v}");
    }
    for (i, v) in report.frobenius_norms.iter().enumerate() {
        println!("frobenius_norm[{i}] = {v}");
    }
    for (i, v) in report.dist_from_init_per_layer.iter().enumerate() {
        println!("dist_from_init[{i}] = {v}");
    }
    for (i, v) in report.norm21_values.iter().enumerate() {
        println!("norm21_displacement[{i}] = {v}");
    }
    println!("dist_from_origin = {}", report.dist_from_origin);
    println!(
        "spectral_product = {}",
        report.spectral_norms.iter().product::<f64>()
    );
    println!("bound_neyshabur18 = {}", report.bound_neyshabur18);
    println!("bound_bartlett17 = {}", report.bound_bartlett17);
    match report.bound_two_layer19 {
        Some(v) => println!("bound_two_layer19 = {v}"),
        None => println!("bound_two_layer19 = n/a"),
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Linear(args) => run_simple(Experiment::Linear, args),
        Command::Expnet(args) => run_simple(Experiment::ExpNet, args),
        Command::Relu(args) => run_simple(Experiment::ReluHypersphere, args),
        Command::Abstract(args) => run_simple(Experiment::Abstract, args),
        Command::Sweep(args) => run_sweep(args),
        Command::BoundsReport(args) => run_bounds_report(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
