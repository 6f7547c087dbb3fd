//! Norm-based bound evaluation and the estimators that turn trial runs
//! into generalization and uniform-convergence certificates.
//!
//! The three audited bound families are evaluated with every big-O
//! constant set to 1. Their absolute values are meaningless across
//! families; what the laboratory tracks is how each one moves as the
//! training-set size grows, against the backdrop of a test error that
//! improves with more data.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::losses::{Dataset, LabeledExample};
use crate::numerics::{sample_gaussian, Matrix, RngStream, SPECTRAL_MAX_ITER, SPECTRAL_TOL};
use crate::relu::TwoLayerNet;
use crate::report::TrialReport;

/// Everything `compute_bounds` measures on one network: raw per-layer
/// norms plus the three bound values.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    /// Frobenius distance of each layer from its reference snapshot.
    pub dist_from_init_per_layer: Vec<f64>,
    /// Norm of the whole concatenated parameter vector.
    pub dist_from_origin: f64,
    /// Spectral norm of each layer's current weights.
    pub spectral_norms: Vec<f64>,
    /// Frobenius norm of each layer's current weights.
    pub frobenius_norms: Vec<f64>,
    /// (2,1) group norm of each layer's displacement from its
    /// reference.
    pub norm21_values: Vec<f64>,
    /// Spectral-product bound with the Frobenius-ratio distance term.
    pub bound_neyshabur18: f64,
    /// Spectral-product bound with the (2,1)-ratio distance term.
    pub bound_bartlett17: f64,
    /// Width-aware two-layer bound; present only when the layer list
    /// has exactly two layers.
    pub bound_two_layer19: Option<f64>,
    pub gamma_used: f64,
    pub b_used: f64,
    pub m: usize,
}

/// Evaluate the bound families on a stack of layers, each paired with
/// its reference (initialization) snapshot.
///
/// With d layers, h the largest matrix dimension anywhere in the stack,
/// P the product of spectral norms and B the input-norm cap:
///
///   neyshabur18 = (B d sqrt(h) / (gamma sqrt(m))) P
///                 sqrt(sum_k |W_k - Z_k|_F^2 / |W_k|_2^2)
///   bartlett17  = (B / (gamma sqrt(m))) P
///                 (sum_k (|W_k - Z_k|_{2,1} / |W_k|_2)^(2/3))^(3/2)
///   two_layer19 = |W_2|_F (|W_1 - Z_1|_F + |Z_1|_2) / (gamma sqrt(m))
///                 + sqrt(h) / sqrt(m)
///
/// all with leading constant 1. A layer with zero spectral norm is an
/// error: both distance terms divide by it.
pub fn compute_bounds(
    layers: &[(&Matrix, &Matrix)],
    b: f64,
    gamma: f64,
    m: usize,
) -> Result<BoundReport> {
    if layers.is_empty() {
        return Err(Error::EmptyInput("bound evaluation needs at least one layer"));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::BadParameter(format!("input-norm cap B must be positive, got {b}")));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::BadParameter(format!("margin gamma must be positive, got {gamma}")));
    }
    if m == 0 {
        return Err(Error::BadParameter("sample size m must be positive".into()));
    }

    let d = layers.len() as f64;
    let mut h = 0usize;
    let mut spectral_norms = Vec::with_capacity(layers.len());
    let mut frobenius_norms = Vec::with_capacity(layers.len());
    let mut norm21_values = Vec::with_capacity(layers.len());
    let mut dist_from_init_per_layer = Vec::with_capacity(layers.len());
    let mut spectral_product = 1.0;
    let mut fro_ratio_sq = 0.0;
    let mut group_ratio_23 = 0.0;
    let mut origin_sq = 0.0;

    for (k, (w, z)) in layers.iter().enumerate() {
        if (w.rows(), w.cols()) != (z.rows(), z.cols()) {
            return Err(Error::DimensionMismatch {
                expected: w.rows() * w.cols(),
                got: z.rows() * z.cols(),
                context: "layer vs reference snapshot shape",
            });
        }
        h = h.max(w.rows()).max(w.cols());
        let spec = w.spectral_norm(SPECTRAL_TOL, SPECTRAL_MAX_ITER)?;
        if spec == 0.0 {
            return Err(Error::BadParameter(format!(
                "layer {k} has zero spectral norm; the distance ratios are undefined"
            )));
        }
        let disp = w.sub(z);
        let dist = disp.frobenius_norm();
        let n21 = disp.norm21();
        let fro = w.frobenius_norm();

        spectral_product *= spec;
        fro_ratio_sq += (dist / spec) * (dist / spec);
        group_ratio_23 += (n21 / spec).powf(2.0 / 3.0);
        origin_sq += fro * fro;

        spectral_norms.push(spec);
        frobenius_norms.push(fro);
        norm21_values.push(n21);
        dist_from_init_per_layer.push(dist);
    }

    let hf = h as f64;
    let mf = m as f64;
    let prefix = b / (gamma * mf.sqrt());
    let bound_neyshabur18 = prefix * d * hf.sqrt() * spectral_product * fro_ratio_sq.sqrt();
    let bound_bartlett17 = prefix * spectral_product * group_ratio_23.powf(1.5);
    let bound_two_layer19 = if layers.len() == 2 {
        let (w1, z1) = layers[0];
        let (w2, _) = layers[1];
        let z1_spec = z1.spectral_norm(SPECTRAL_TOL, SPECTRAL_MAX_ITER)?;
        let first = w2.frobenius_norm() * (w1.sub(z1).frobenius_norm() + z1_spec)
            / (gamma * mf.sqrt());
        Some(first + hf.sqrt() / mf.sqrt())
    } else {
        None
    };

    Ok(BoundReport {
        dist_from_init_per_layer,
        dist_from_origin: origin_sq.sqrt(),
        spectral_norms,
        frobenius_norms,
        norm21_values,
        bound_neyshabur18,
        bound_bartlett17,
        bound_two_layer19,
        gamma_used: gamma,
        b_used: b,
        m,
    })
}

/// [`compute_bounds`] on a two-layer net, with its recorded
/// initialization as the reference. The bound formulas are functions
/// of the weight matrices alone; the net's bias vectors enter its
/// predictions but not these capacity measures.
pub fn compute_bounds_net(net: &TwoLayerNet, b: f64, gamma: f64, m: usize) -> Result<BoundReport> {
    compute_bounds(
        &[(net.w1(), net.init_w1()), (net.w2(), net.init_w2())],
        b,
        gamma,
        m,
    )
}

/// Largest input norm in a dataset, the B that the bound formulas cap
/// inputs with. Gaussian tasks have unbounded support, so the train-set
/// maximum stands in for the distribution-level cap.
pub fn max_input_norm(data: &Dataset) -> f64 {
    data.iter()
        .map(|e| crate::numerics::dot(&e.x, &e.x).sqrt())
        .fold(0.0, f64::max)
}

/// Train-margin order statistics and the train/test mean-margin gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginStats {
    pub percentile_1: f64,
    pub median: f64,
    pub mean_train: f64,
    pub mean_test: f64,
    /// mean_train - mean_test: positive when the net rates its own
    /// training data above fresh data.
    pub pseudo_overfit_gap: f64,
}

/// Nearest-rank order statistic: the smallest sorted value whose rank
/// covers fraction `p` of the sample.
fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = ((p * n as f64).ceil() as usize).clamp(1, n);
    sorted[rank - 1]
}

pub fn margin_stats(net: &TwoLayerNet, train: &Dataset, test: &Dataset) -> Result<MarginStats> {
    let train_margins = net.margins(train)?;
    let test_margins = net.margins(test)?;
    let mut sorted = train_margins.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mean_train = mean(&train_margins);
    let mean_test = mean(&test_margins);
    Ok(MarginStats {
        percentile_1: nearest_rank(&sorted, 0.01),
        median: nearest_rank(&sorted, 0.5),
        mean_train,
        mean_test,
        pseudo_overfit_gap: mean_train - mean_test,
    })
}

/// Distances between two runs from a shared initialization, plus the
/// first run's norm diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryDiagnostics {
    /// l2 distance between the two concatenated parameter vectors.
    pub dist_between_runs: f64,
    /// Product of per-layer spectral norms of the first net.
    pub spectral_product_a: f64,
    /// Distance of the first net from its own initialization.
    pub dist_init_a: f64,
}

pub fn trajectory_diagnostics(
    net_a: &TwoLayerNet,
    net_b: &TwoLayerNet,
) -> Result<TrajectoryDiagnostics> {
    if net_a.dim() != net_b.dim() || net_a.width() != net_b.width() {
        return Err(Error::DimensionMismatch {
            expected: net_a.width(),
            got: net_b.width(),
            context: "trajectory comparison shapes",
        });
    }
    let d1 = net_a.w1().sub(net_b.w1()).frobenius_norm();
    let d2 = net_a.w2().sub(net_b.w2()).frobenius_norm();
    let db: f64 = net_a
        .b1()
        .iter()
        .zip(net_b.b1())
        .chain(net_a.b2().iter().zip(net_b.b2()))
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let s1 = net_a.w1().spectral_norm(SPECTRAL_TOL, SPECTRAL_MAX_ITER)?;
    let s2 = net_a.w2().spectral_norm(SPECTRAL_TOL, SPECTRAL_MAX_ITER)?;
    Ok(TrajectoryDiagnostics {
        dist_between_runs: (d1 * d1 + d2 * d2 + db).sqrt(),
        spectral_product_a: s1 * s2,
        dist_init_a: net_a.dist_from_init(),
    })
}

/// Certificates distilled from a batch of independent trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsReport {
    /// Empirical (1-delta)-quantile of the per-trial test - train gap:
    /// an estimate of the tightest generalization guarantee.
    pub eps_gen_estimate: f64,
    /// Conservative lower bound on what any uniform convergence
    /// statement over the algorithm's reachable outputs must concede.
    pub eps_unif_alg_lower: f64,
    /// Worst per-trial Monte Carlo standard error among the test
    /// losses.
    pub std_err: f64,
}

/// Turn per-trial losses into the two certificates.
///
/// The generalization estimate is the nearest-rank (1-delta)-quantile
/// of test - train. The uniform-convergence floor discards the
/// floor(delta n) trials with the worst generalization, then takes the
/// smallest |test - bad| among the rest: each retained trial carries a
/// companion set that some function in the algorithm's reach gets
/// almost entirely wrong, so every retained trial individually
/// witnesses at least that much looseness, and reporting the minimum
/// stays on the safe side of the quantile convention.
pub fn estimate_eps(trials: &[TrialReport], delta: f64) -> Result<EpsReport> {
    if trials.len() < 10 {
        return Err(Error::BadParameter(format!(
            "certificates need at least 10 trials, got {}",
            trials.len()
        )));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::BadParameter(format!("delta must lie in [0, 1), got {delta}")));
    }
    let n = trials.len();
    let gaps: Vec<f64> = trials.iter().map(|t| t.test_loss - t.train_loss).collect();

    let mut sorted_gaps = gaps.clone();
    sorted_gaps.sort_by(|a, b| a.total_cmp(b));
    let eps_gen_estimate = nearest_rank(&sorted_gaps, 1.0 - delta);

    let discard = (delta * n as f64).floor() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| gaps[i].total_cmp(&gaps[j]).then(i.cmp(&j)));
    let eps_unif_alg_lower = order[..n - discard]
        .iter()
        .map(|&i| trials[i].witness)
        .fold(f64::INFINITY, f64::min);

    let std_err = trials.iter().map(|t| t.test_std_err).fold(0.0, f64::max);
    Ok(EpsReport { eps_gen_estimate, eps_unif_alg_lower, std_err })
}

/// Both derandomized PAC-Bayes lower bounds, exactly as stated:
///
///   type_a = e^(-3/2) ua - (1 - e^(-3/2)) (hat + gen)
///   type_b = ua - (e^(3/2) - 1) (hat + gen)
///
/// Inputs are error levels in [0, 1]; outputs are raw and may be
/// negative (a negative certificate certifies nothing, but clamping it
/// would hide how far below zero it fell).
pub fn pb_det_lower_bounds(
    eps_unif_alg: f64,
    eps_gen: f64,
    eps_hat: f64,
) -> Result<(f64, f64)> {
    for (name, v) in [("eps_unif_alg", eps_unif_alg), ("eps_gen", eps_gen), ("eps_hat", eps_hat)]
    {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::BadParameter(format!("{name} must lie in [0, 1], got {v}")));
        }
    }
    let retain = (-1.5f64).exp();
    let type_a = retain * eps_unif_alg - (1.0 - retain) * (eps_hat + eps_gen);
    let type_b = eps_unif_alg - (1.5f64.exp() - 1.0) * (eps_hat + eps_gen);
    Ok((type_a, type_b))
}

/// A classifier that answers like `base` everywhere except on the
/// negations of its training inputs, where it answers the opposite.
///
/// Membership in the flip set is exact: two inputs collide only when
/// every coordinate has the identical bit pattern. For inputs with a
/// density that never happens by chance, so the flip set is invisible
/// to any test draw while containing exactly the points the companion
/// set queries.
pub struct AbstractMemorizer<F: Fn(&[f64]) -> i8> {
    base: F,
    flipped: HashSet<Vec<u64>>,
    dim: usize,
}

fn bit_key(x: &[f64]) -> Vec<u64> {
    x.iter().map(|v| v.to_bits()).collect()
}

impl<F: Fn(&[f64]) -> i8> AbstractMemorizer<F> {
    pub fn new(base: F, train: &Dataset) -> Self {
        let flipped = train.iter().map(|e| bit_key(&e.x.iter().map(|v| -v).collect::<Vec<_>>())).collect();
        AbstractMemorizer { base, flipped, dim: train.dim() }
    }

    pub fn predict(&self, x: &[f64]) -> i8 {
        let label = (self.base)(x);
        if self.flipped.contains(&bit_key(x)) {
            -label
        } else {
            label
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Ground-truth rule for the memorizer demo: the sign of the first
/// coordinate, ties resolved to +1.
pub fn first_coordinate_sign(x: &[f64]) -> i8 {
    if x[0] < 0.0 {
        -1
    } else {
        1
    }
}

/// The memorizer demo end to end: train on m labeled Gaussians, then
/// score the training set, the negation companion set and fresh test
/// draws, all against the ground-truth rule. The companion set is
/// wrong by construction on every point and fresh draws never collide
/// with it, so the expected report is train 0, test 0, companion 1.
pub fn run_abstract_trial(
    dim: usize,
    m: usize,
    n_test: usize,
    stream: RngStream,
) -> Result<TrialReport> {
    if dim == 0 || m == 0 || n_test == 0 {
        return Err(Error::BadParameter(
            "abstract demo needs positive dim, m and n_test".into(),
        ));
    }
    let examples = (0..m)
        .map(|i| {
            let mut rng = stream.derive(i as u64).rng();
            let x = sample_gaussian(&mut rng, dim, 1.0).expect("unit variance");
            let y = first_coordinate_sign(&x);
            LabeledExample::new(x, y)
        })
        .collect();
    let train = Dataset::new(examples)?;
    let model = AbstractMemorizer::new(first_coordinate_sign, &train);

    let train_loss = train
        .iter()
        .filter(|e| model.predict(&e.x) != e.y)
        .count() as f64
        / m as f64;

    let bad_loss = train
        .iter()
        .filter(|e| {
            let neg: Vec<f64> = e.x.iter().map(|v| -v).collect();
            model.predict(&neg) != first_coordinate_sign(&neg)
        })
        .count() as f64
        / m as f64;

    let test_stream = stream.derive(u64::MAX);
    let mut test_errors = 0usize;
    for j in 0..n_test {
        let mut rng = test_stream.derive(j as u64).rng();
        let z = sample_gaussian(&mut rng, dim, 1.0).expect("unit variance");
        if model.predict(&z) != first_coordinate_sign(&z) {
            test_errors += 1;
        }
    }
    let n = n_test as f64;
    let test_loss = test_errors as f64 / n;
    let test_std_err = if n_test > 1 {
        ((test_loss * (1.0 - test_loss)) * n / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };

    Ok(TrialReport {
        train_loss,
        test_loss,
        test_std_err,
        bad_set_loss: bad_loss,
        witness: (test_loss - bad_loss).abs(),
        weight_norm: None,
        noise_weight_norm: None,
        gamma: 0.0,
        m,
        dim,
    })
}
