//! Finite-difference validation of the analytic training gradients on
//! random small networks, for both training losses and all four
//! parameter blocks.

use boundlab::numerics::{standard_normal, Matrix, RngStream};
use boundlab::relu::{batch_gradients, Gradients, TrainLoss, TwoLayerNet, LOGITS};
use test_oracles::{finite_difference_gradient, gradient_relative_error};

fn pack(g: &Gradients) -> Vec<f64> {
    let mut flat = g.dw1.as_slice().to_vec();
    flat.extend_from_slice(&g.db1);
    flat.extend_from_slice(g.dw2.as_slice());
    flat.extend_from_slice(&g.db2);
    flat
}

fn unpack(theta: &[f64], dim: usize, width: usize) -> TwoLayerNet {
    let n1 = width * dim;
    let n2 = LOGITS * width;
    let w1 = Matrix::from_vec(width, dim, theta[..n1].to_vec()).unwrap();
    let b1 = theta[n1..n1 + width].to_vec();
    let w2 = Matrix::from_vec(LOGITS, width, theta[n1 + width..n1 + width + n2].to_vec()).unwrap();
    let b2 = theta[n1 + width + n2..].to_vec();
    TwoLayerNet::with_biases(w1, b1, w2, b2).unwrap()
}

fn flatten_net(net: &TwoLayerNet) -> Vec<f64> {
    let mut flat = net.w1().as_slice().to_vec();
    flat.extend_from_slice(net.b1());
    flat.extend_from_slice(net.w2().as_slice());
    flat.extend_from_slice(net.b2());
    flat
}

/// Draws weights, biases, inputs and classes from the stream, retrying
/// until every hidden pre-activation sits clear of the rectifier kink
/// so the centered difference stays on one linear piece.
fn random_instance(
    dim: usize,
    width: usize,
    batch: usize,
    stream: RngStream,
) -> (TwoLayerNet, Matrix, Vec<usize>) {
    for attempt in 0..200u64 {
        let mut rng = stream.derive(attempt).rng();
        let w1 = Matrix::from_fn(width, dim, |_, _| 0.7 * standard_normal(&mut rng));
        let b1: Vec<f64> = (0..width).map(|_| 0.4 * standard_normal(&mut rng)).collect();
        let w2 = Matrix::from_fn(LOGITS, width, |_, _| 0.7 * standard_normal(&mut rng));
        let b2: Vec<f64> = (0..LOGITS).map(|_| 0.4 * standard_normal(&mut rng)).collect();
        let xs = Matrix::from_fn(batch, dim, |_, _| standard_normal(&mut rng));
        let classes: Vec<usize> =
            (0..batch).map(|_| usize::from(standard_normal(&mut rng) > 0.0)).collect();

        let clear = (0..batch).all(|i| {
            (0..width).all(|u| {
                let pre: f64 = (0..dim).map(|j| w1.get(u, j) * xs.get(i, j)).sum::<f64>() + b1[u];
                pre.abs() > 1e-2
            })
        });
        if clear {
            let net = TwoLayerNet::with_biases(w1, b1, w2, b2).unwrap();
            return (net, xs, classes);
        }
    }
    panic!("no kink-free instance found for dim {dim}, width {width}, batch {batch}");
}

fn check_instances(loss: TrainLoss, seed: u64) {
    let shapes = [
        (3usize, 5usize, 4usize),
        (1, 1, 1),
        (2, 6, 3),
        (4, 2, 5),
        (5, 3, 2),
        (2, 4, 1),
        (6, 1, 4),
        (1, 5, 2),
        (3, 3, 3),
        (4, 6, 5),
        (2, 2, 2),
        (5, 4, 1),
    ];
    for (idx, &(dim, width, batch)) in shapes.iter().enumerate() {
        let (net, xs, classes) = random_instance(dim, width, batch, RngStream::new(seed, idx as u64));
        let (_, analytic) = batch_gradients(&net, &xs, &classes, loss);

        let theta = flatten_net(&net);
        let fd = finite_difference_gradient(
            |t| batch_gradients(&unpack(t, dim, width), &xs, &classes, loss).0,
            &theta,
            1e-5,
        );
        let err = gradient_relative_error(&pack(&analytic), &fd);
        assert!(
            err < 1e-4,
            "{loss:?} instance {idx} (dim {dim}, width {width}, batch {batch}): \
             gradient relative error {err}"
        );
    }
}

#[test]
fn cross_entropy_gradients_match_central_differences() {
    check_instances(TrainLoss::CrossEntropy, 11);
}

#[test]
fn squared_error_gradients_match_central_differences() {
    check_instances(TrainLoss::SquaredError, 12);
}
