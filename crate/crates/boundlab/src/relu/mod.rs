//! Trained two-layer rectifier nets on concentric-sphere data, plus the
//! evaluation helpers the bound audits and interpolation probes use.

pub mod data;
pub mod net;
pub mod train;

pub use data::{project_swap, sample_hypersphere, HypersphereConfig};
pub use net::{TwoLayerNet, LOGITS};
pub use train::{batch_gradients, train_sgd, Gradients, TrainConfig, TrainLoss, TrainOutcome};

use crate::error::{Error, Result};
use crate::losses::{Dataset, LossKind};

/// Mean loss of the net on a dataset at the given loss kind, margins
/// evaluated in batches.
pub fn evaluate_error(net: &TwoLayerNet, data: &Dataset, kind: LossKind) -> Result<f64> {
    let margins = net.margins(data)?;
    Ok(margins.iter().map(|&t| kind.eval(t, 1)).sum::<f64>() / margins.len() as f64)
}

/// 0-1 error along the parameter segment between two nets of identical
/// shape: at each t the weights are (1-t) a + t b and the blended net is
/// scored on `data`. Returns (t, error) pairs in input order.
pub fn interpolate_eval(
    a: &TwoLayerNet,
    b: &TwoLayerNet,
    ts: &[f64],
    data: &Dataset,
) -> Result<Vec<(f64, f64)>> {
    if a.dim() != b.dim() || a.width() != b.width() {
        return Err(Error::DimensionMismatch {
            expected: a.width(),
            got: b.width(),
            context: "interpolation endpoint shapes",
        });
    }
    if ts.iter().any(|t| !t.is_finite()) {
        return Err(Error::BadParameter("interpolation weights must be finite".into()));
    }
    let mut out = Vec::with_capacity(ts.len());
    let blend_vec = |va: &[f64], vb: &[f64], t: f64| -> Vec<f64> {
        va.iter().zip(vb).map(|(x, y)| (1.0 - t) * x + t * y).collect()
    };
    for &t in ts {
        let mut w1 = a.w1().clone();
        w1.scale(1.0 - t);
        w1.add_scaled(b.w1(), t);
        let mut w2 = a.w2().clone();
        w2.scale(1.0 - t);
        w2.add_scaled(b.w2(), t);
        let b1 = blend_vec(a.b1(), b.b1(), t);
        let b2 = blend_vec(a.b2(), b.b2(), t);
        let blend = TwoLayerNet::with_biases(w1, b1, w2, b2)?;
        out.push((t, evaluate_error(&blend, data, LossKind::ZeroOne)?));
    }
    Ok(out)
}
