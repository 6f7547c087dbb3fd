//! Minibatch SGD for [`TwoLayerNet`] with a margin-based stopping rule.
//!
//! Training stops at the end of the first epoch where at least
//! `stop_fraction` of the training examples have margin at least
//! `stop_margin`. With the cross-entropy loss margins keep growing
//! after separation, so large stop margins are reachable; the squared
//! loss pulls logits toward the one-hot targets and saturates margins
//! near 1, so stop margins for it must sit below that.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::losses::Dataset;
use crate::numerics::{axpy, Matrix, RngStream};

use super::net::{TwoLayerNet, LOGITS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainLoss {
    /// Softmax cross-entropy over the two logits.
    CrossEntropy,
    /// Squared distance of the logits to the one-hot target.
    SquaredError,
}

impl TrainLoss {
    /// Per-example loss and its gradient in the logits.
    pub fn loss_and_dlogits(&self, logits: &[f64; LOGITS], class: usize) -> (f64, [f64; LOGITS]) {
        match self {
            TrainLoss::CrossEntropy => {
                let m = logits[0].max(logits[1]);
                let e0 = (logits[0] - m).exp();
                let e1 = (logits[1] - m).exp();
                let z = e0 + e1;
                let loss = z.ln() - (logits[class] - m);
                let mut d = [e0 / z, e1 / z];
                d[class] -= 1.0;
                (loss, d)
            }
            TrainLoss::SquaredError => {
                let mut loss = 0.0;
                let mut d = [0.0; LOGITS];
                for c in 0..LOGITS {
                    let target = if c == class { 1.0 } else { 0.0 };
                    let r = logits[c] - target;
                    loss += r * r;
                    d[c] = 2.0 * r;
                }
                (loss, d)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Fraction of training examples that must clear `stop_margin`.
    pub stop_fraction: f64,
    pub stop_margin: f64,
    pub max_epochs: usize,
    pub loss: TrainLoss,
}

impl TrainConfig {
    /// The reference recipe: learning rate 0.1, batches of 64, stop
    /// when 99% of the data has margin at least `stop_margin`.
    pub fn standard(loss: TrainLoss, stop_margin: f64, max_epochs: usize) -> Self {
        TrainConfig {
            learning_rate: 0.1,
            batch_size: 64,
            stop_fraction: 0.99,
            stop_margin,
            max_epochs,
            loss,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::BadParameter(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::BadParameter("batch size must be at least 1".into()));
        }
        if !(self.stop_fraction > 0.0 && self.stop_fraction <= 1.0) {
            return Err(Error::BadParameter(format!(
                "stop fraction must lie in (0, 1], got {}",
                self.stop_fraction
            )));
        }
        if !(self.stop_margin >= 0.0 && self.stop_margin.is_finite()) {
            return Err(Error::BadParameter(format!(
                "stop margin must be nonnegative, got {}",
                self.stop_margin
            )));
        }
        if self.max_epochs == 0 {
            return Err(Error::BadParameter("max_epochs must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug)]
pub struct TrainOutcome {
    pub net: TwoLayerNet,
    /// Epochs actually run (including the one that triggered the stop).
    pub epochs: usize,
    /// Whether the margin stop fired before `max_epochs` ran out.
    pub converged: bool,
}

/// Gradients of the mean batch loss in every parameter of the net.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub dw1: Matrix,
    pub db1: Vec<f64>,
    pub dw2: Matrix,
    pub db2: Vec<f64>,
}

fn column_sums(m: &Matrix) -> Vec<f64> {
    let mut out = vec![0.0; m.cols()];
    for i in 0..m.rows() {
        axpy(&mut out, 1.0, m.row(i));
    }
    out
}

/// Mean loss over the batch and its gradients in all four parameter
/// blocks. `xs` holds one example per row, `classes` the matching
/// logit indices. Exposed so tests can difference it.
pub fn batch_gradients(
    net: &TwoLayerNet,
    xs: &Matrix,
    classes: &[usize],
    loss: TrainLoss,
) -> (f64, Gradients) {
    assert_eq!(xs.rows(), classes.len(), "one class index per batch row");
    let b = xs.rows();
    let h = net.hidden_batch(xs);
    let logits = h.matmul_nt(net.w2());

    let inv_b = 1.0 / b as f64;
    let mut mean_loss = 0.0;
    let mut dlogits = Matrix::zeros(b, LOGITS);
    for i in 0..b {
        let li = [logits.get(i, 0) + net.b2()[0], logits.get(i, 1) + net.b2()[1]];
        let (l, d) = loss.loss_and_dlogits(&li, classes[i]);
        mean_loss += l * inv_b;
        dlogits.set(i, 0, d[0] * inv_b);
        dlogits.set(i, 1, d[1] * inv_b);
    }

    let dw2 = dlogits.matmul_tn(&h);
    let db2 = column_sums(&dlogits);
    // Backprop through the rectifier: zero wherever the unit was
    // clipped. h > 0 is the mask (the derivative at exactly 0 is 0).
    let mut dh = dlogits.matmul(net.w2());
    for (m, &a) in dh.as_mut_slice().iter_mut().zip(h.as_slice()) {
        if a <= 0.0 {
            *m = 0.0;
        }
    }
    let dw1 = dh.matmul_tn(xs);
    let db1 = column_sums(&dh);
    (mean_loss, Gradients { dw1, db1, dw2, db2 })
}

/// Whether at least `needed` examples have margin >= `stop_margin`,
/// scanning in batches and giving up as soon as too many failures have
/// been seen.
fn margin_stop_reached(
    net: &TwoLayerNet,
    data: &Dataset,
    stop_margin: f64,
    needed: usize,
) -> bool {
    let allowed_failures = data.len() - needed;
    let mut failures = 0usize;
    for chunk in data.examples().chunks(256) {
        let xs = Matrix::from_fn(chunk.len(), data.dim(), |i, j| chunk[i].x[j]);
        let logits = net.logits_batch(&xs);
        for (i, e) in chunk.iter().enumerate() {
            let margin = e.y as f64 * (logits.get(i, 1) - logits.get(i, 0));
            if !(margin >= stop_margin) {
                failures += 1;
                if failures > allowed_failures {
                    return false;
                }
            }
        }
    }
    true
}

/// Run minibatch SGD until the margin stop fires or `max_epochs` pass.
///
/// Each epoch shuffles the example order with a stream derived from
/// `stream` and the epoch index, then sweeps batches of `batch_size`
/// (the last one may be short). A non-finite batch loss aborts with the
/// epoch and batch where it happened.
pub fn train_sgd(
    net: TwoLayerNet,
    data: &Dataset,
    cfg: &TrainConfig,
    stream: RngStream,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if data.dim() != net.dim() {
        return Err(Error::DimensionMismatch {
            expected: net.dim(),
            got: data.dim(),
            context: "training data input width",
        });
    }
    let m = data.len();
    let needed = ((cfg.stop_fraction * m as f64).ceil() as usize).min(m);
    let examples = data.examples();

    let mut net = net;
    let mut order: Vec<usize> = (0..m).collect();
    for epoch in 0..cfg.max_epochs {
        let mut shuffle_rng = stream.derive(epoch as u64).rng();
        order.shuffle(&mut shuffle_rng);

        for (batch_idx, batch) in order.chunks(cfg.batch_size).enumerate() {
            let xs = Matrix::from_fn(batch.len(), data.dim(), |i, j| examples[batch[i]].x[j]);
            let classes: Vec<usize> =
                batch.iter().map(|&i| examples[i].class_index()).collect();
            let (loss, g) = batch_gradients(&net, &xs, &classes, cfg.loss);
            if !loss.is_finite() {
                return Err(Error::NonFiniteTraining { epoch, batch: batch_idx });
            }
            net.w1_mut().add_scaled(&g.dw1, -cfg.learning_rate);
            net.w2_mut().add_scaled(&g.dw2, -cfg.learning_rate);
            axpy(net.b1_mut(), -cfg.learning_rate, &g.db1);
            axpy(net.b2_mut(), -cfg.learning_rate, &g.db2);
        }

        if margin_stop_reached(&net, data, cfg.stop_margin, needed) {
            return Ok(TrainOutcome { net, epochs: epoch + 1, converged: true });
        }
    }
    Ok(TrainOutcome { net, epochs: cfg.max_epochs, converged: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::losses::LabeledExample;
    use crate::relu::data::{sample_hypersphere, HypersphereConfig};

    #[test]
    fn squared_loss_gradients_by_hand() {
        // Identity net, one example x = (2, 3) with class 1: logits are
        // (2, 3), targets (0, 1), so the loss is 4 + 4 = 8 and every
        // gradient can be written down directly.
        let w1 = Matrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let w2 = Matrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let net = TwoLayerNet::from_parts(w1, w2).unwrap();
        let xs = Matrix::from_rows(vec![vec![2.0, 3.0]]).unwrap();
        let (loss, g) = batch_gradients(&net, &xs, &[1], TrainLoss::SquaredError);
        assert_eq!(loss, 8.0);
        // dlogits = (4, 4); dw2 = dlogits^T h with h = (2, 3), and the
        // output biases see dlogits directly.
        assert_eq!(g.dw2.as_slice(), &[8.0, 12.0, 8.0, 12.0]);
        assert_eq!(g.db2, vec![4.0, 4.0]);
        // dh = dlogits w2 = (4, 4), both units active; dw1 = dh^T x and
        // the hidden biases see dh.
        assert_eq!(g.dw1.as_slice(), &[8.0, 12.0, 8.0, 12.0]);
        assert_eq!(g.db1, vec![4.0, 4.0]);
    }

    #[test]
    fn cross_entropy_at_symmetric_logits() {
        let (loss, d) = TrainLoss::CrossEntropy.loss_and_dlogits(&[0.0, 0.0], 1);
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((d[0] - 0.5).abs() < 1e-15);
        assert!((d[1] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn cross_entropy_is_stable_at_extreme_logits() {
        let (loss, d) = TrainLoss::CrossEntropy.loss_and_dlogits(&[800.0, -800.0], 0);
        assert_eq!(loss, 0.0);
        assert!(d.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn rectifier_mask_blocks_clipped_units() {
        // Second hidden unit is clipped for x = (1, 0), so its row of
        // dw1 must stay zero.
        let w1 = Matrix::from_rows(vec![vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        let w2 = Matrix::from_rows(vec![vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let net = TwoLayerNet::from_parts(w1, w2).unwrap();
        let xs = Matrix::from_rows(vec![vec![1.0, 0.0]]).unwrap();
        let (_, g) = batch_gradients(&net, &xs, &[0], TrainLoss::SquaredError);
        assert_eq!(g.dw1.row(1), &[0.0, 0.0], "clipped unit must receive no gradient");
        assert_eq!(g.db1[1], 0.0, "clipped unit's bias must receive no gradient");
        assert!(g.dw1.row(0).iter().any(|v| *v != 0.0));
        assert!(g.db1[0] != 0.0);
    }

    #[test]
    fn training_separates_the_spheres() {
        let cfg = HypersphereConfig::new(8, 1.0, 2.0).unwrap();
        let data = sample_hypersphere(&cfg, 256, RngStream::new(50, 0)).unwrap();
        let net = TwoLayerNet::init(8, 128, 1.0, RngStream::new(50, 1)).unwrap();
        let train_cfg = TrainConfig {
            learning_rate: 0.1,
            batch_size: 64,
            stop_fraction: 0.99,
            stop_margin: 1.0,
            max_epochs: 400,
            loss: TrainLoss::CrossEntropy,
        };
        let out = train_sgd(net, &data, &train_cfg, RngStream::new(50, 2)).unwrap();
        assert!(out.converged, "spheres this far apart must separate within the budget");
        let margins = out.net.margins(&data).unwrap();
        let cleared = margins.iter().filter(|&&v| v >= 1.0).count();
        assert!(cleared as f64 >= 0.99 * 256.0, "stop rule fired with {cleared}/256 cleared");
    }

    #[test]
    fn training_is_deterministic() {
        let cfg = HypersphereConfig::new(4, 1.0, 1.1).unwrap();
        let data = sample_hypersphere(&cfg, 64, RngStream::new(51, 0)).unwrap();
        let train_cfg = TrainConfig {
            learning_rate: 0.1,
            batch_size: 16,
            stop_fraction: 1.0,
            stop_margin: 0.2,
            max_epochs: 20,
            loss: TrainLoss::SquaredError,
        };
        let run = |_: ()| {
            let net = TwoLayerNet::init(4, 32, 1.0, RngStream::new(51, 1)).unwrap();
            train_sgd(net, &data, &train_cfg, RngStream::new(51, 2)).unwrap()
        };
        let a = run(());
        let b = run(());
        assert_eq!(a.epochs, b.epochs);
        assert_eq!(a.net.w1().as_slice(), b.net.w1().as_slice());
        assert_eq!(a.net.w2().as_slice(), b.net.w2().as_slice());
        assert_eq!(a.net.b1(), b.net.b1());
        assert_eq!(a.net.b2(), b.net.b2());
    }

    #[test]
    fn exploding_run_reports_where_it_died() {
        let examples = (0..8)
            .map(|i| LabeledExample::new(vec![1e3, -1e3], if i % 2 == 0 { 1 } else { -1 }))
            .collect();
        let data = Dataset::new(examples).unwrap();
        let net = TwoLayerNet::init(2, 16, 1.0, RngStream::new(52, 0)).unwrap();
        let train_cfg = TrainConfig {
            learning_rate: 1e250,
            batch_size: 2,
            stop_fraction: 1.0,
            stop_margin: 1.0,
            max_epochs: 5,
            loss: TrainLoss::SquaredError,
        };
        match train_sgd(net, &data, &train_cfg, RngStream::new(52, 1)) {
            Err(Error::NonFiniteTraining { .. }) => {}
            other => panic!("expected the non-finite guard to fire, got {other:?}"),
        }
    }
}
