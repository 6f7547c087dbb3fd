//! Margins, surrogate losses, and loss estimators.
//!
//! A binary predictor here is any function x -> y_out with y_out real;
//! multi-logit networks reduce to this through y_out = f[+1] - f[-1].
//! For a labeled pair the product y * y_out is the (binary) margin, and
//! the three losses are step functions of it:
//!
//! * 0-1 loss: 1 if y*y_out <= 0, else 0 (ties count as errors);
//! * ramp loss at level gamma: 1 below 0, linear ramp down to 0 at
//!   gamma, 0 beyond gamma. At gamma = 0 it coincides with 0-1 loss;
//! * strict loss at level gamma: 1 unless y*y_out >= gamma. It upper
//!   bounds the ramp, which upper bounds 0-1, for every gamma > 0.
//!
//! For logit vectors the margin is f[y] minus the best wrong logit;
//! with two logits this equals y * (f[+1] - f[-1]).

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::RngStream;

/// One labeled input. Labels live in {-1, +1}.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample {
    pub x: Vec<f64>,
    pub y: i8,
}

impl LabeledExample {
    pub fn new(x: Vec<f64>, y: i8) -> Self {
        assert!(y == 1 || y == -1, "label must be -1 or +1, got {y}");
        debug_assert!(x.iter().all(|v| v.is_finite()), "example coordinates must be finite");
        LabeledExample { x, y }
    }

    /// Index of the label in a two-logit output: -1 -> 0, +1 -> 1.
    pub fn class_index(&self) -> usize {
        ((self.y + 1) / 2) as usize
    }
}

/// A set of labeled examples of uniform dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    examples: Vec<LabeledExample>,
}

impl Dataset {
    pub fn new(examples: Vec<LabeledExample>) -> Result<Self> {
        let dim = match examples.first() {
            Some(e) => e.x.len(),
            None => return Err(Error::EmptyInput("dataset must hold at least one example")),
        };
        if let Some(bad) = examples.iter().find(|e| e.x.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.x.len(),
                context: "dataset example dimension",
            });
        }
        Ok(Dataset { dim, examples })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn examples(&self) -> &[LabeledExample] {
        &self.examples
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LabeledExample> {
        self.examples.iter()
    }
}

/// 0-1 loss of a real-valued output against a {-1,+1} label.
pub fn zero_one_loss(y_out: f64, y: i8) -> f64 {
    if y as f64 * y_out <= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Ramp loss at level `gamma >= 0`.
pub fn ramp_loss(y_out: f64, y: i8, gamma: f64) -> f64 {
    debug_assert!(gamma >= 0.0, "ramp level must be nonnegative");
    let t = y as f64 * y_out;
    if t <= 0.0 {
        1.0
    } else if t < gamma {
        1.0 - t / gamma
    } else {
        0.0
    }
}

/// Strict margin loss at level `gamma`: fails everything short of a
/// full gamma margin.
pub fn strict_loss(y_out: f64, y: i8, gamma: f64) -> f64 {
    if y as f64 * y_out >= gamma {
        0.0
    } else {
        1.0
    }
}

/// Multi-logit margin: logits[y] - max over the other logits. Positive
/// iff the prediction is correct with room to spare.
pub fn margin(logits: &[f64], class_index: usize) -> Result<f64> {
    if class_index >= logits.len() {
        return Err(Error::BadParameter(format!(
            "class index {class_index} out of range for {} logits",
            logits.len()
        )));
    }
    if logits.len() < 2 {
        return Err(Error::BadParameter("margin needs at least two logits".into()));
    }
    let own = logits[class_index];
    let best_other = logits
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != class_index)
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(own - best_other)
}

/// Which loss to apply to a binary margin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossKind {
    ZeroOne,
    Ramp { gamma: f64 },
    Strict { gamma: f64 },
}

impl LossKind {
    pub fn eval(&self, y_out: f64, y: i8) -> f64 {
        match *self {
            LossKind::ZeroOne => zero_one_loss(y_out, y),
            LossKind::Ramp { gamma } => ramp_loss(y_out, y, gamma),
            LossKind::Strict { gamma } => strict_loss(y_out, y, gamma),
        }
    }
}

/// Mean loss of `predict` over a dataset.
pub fn empirical_loss(
    predict: impl Fn(&[f64]) -> f64,
    data: &Dataset,
    kind: LossKind,
) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyInput("empirical loss over empty dataset"));
    }
    let total: f64 = data.iter().map(|e| kind.eval(predict(&e.x), e.y)).sum();
    Ok(total / data.len() as f64)
}

/// Monte Carlo estimate of the expected loss of `predict` under the
/// distribution induced by `sample`. Returns (estimate, standard
/// error); the standard error is the sample standard deviation divided
/// by sqrt(n), and 0 when n = 1. The draw sequence is fully determined
/// by `stream`.
pub fn mc_expected_loss(
    predict: impl Fn(&[f64]) -> f64,
    mut sample: impl FnMut(&mut ChaCha8Rng) -> LabeledExample,
    n: usize,
    kind: LossKind,
    stream: RngStream,
) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::BadParameter("Monte Carlo estimate needs n >= 1".into()));
    }
    let mut rng = stream.rng();
    // Welford accumulation: one pass, numerically stable.
    let mut mean = 0.0f64;
    let mut m2 = 0.0f64;
    for i in 0..n {
        let e = sample(&mut rng);
        let loss = kind.eval(predict(&e.x), e.y);
        let delta = loss - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (loss - mean);
    }
    let std_err = if n > 1 { (m2 / (n as f64 - 1.0)).sqrt() / (n as f64).sqrt() } else { 0.0 };
    Ok((mean, std_err))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_values_on_known_points() {
        assert_eq!(ramp_loss(0.5, 1, 1.0), 0.5, "halfway up the ramp");
        assert_eq!(ramp_loss(-0.2, 1, 1.0), 1.0, "wrong side is full loss");
        assert_eq!(ramp_loss(2.0, -1, 1.0), 1.0, "margin -2 is full loss");
        assert_eq!(ramp_loss(2.0, 1, 1.0), 0.0, "comfortable margin is zero loss");
    }

    #[test]
    fn ramp_at_gamma_zero_is_zero_one() {
        for &(y_out, y) in &[(0.5, 1i8), (-0.5, 1), (0.0, 1), (0.3, -1), (-2.0, -1)] {
            assert_eq!(
                ramp_loss(y_out, y, 0.0),
                zero_one_loss(y_out, y),
                "ramp(0) must equal 0-1 at y_out={y_out}, y={y}"
            );
        }
    }

    #[test]
    fn strict_values_on_known_points() {
        assert_eq!(strict_loss(0.5, 1, 1.0), 1.0, "margin 0.5 misses level 1");
        assert_eq!(strict_loss(0.0, 1, 0.0), 0.0, "boundary y*y_out >= 0 passes");
        assert_eq!(strict_loss(1.0, 1, 1.0), 0.0, "boundary y*y_out >= gamma passes");
    }

    #[test]
    fn tie_counts_as_error() {
        assert_eq!(zero_one_loss(0.0, 1), 1.0);
        assert_eq!(zero_one_loss(0.0, -1), 1.0);
    }

    #[test]
    fn margin_of_logit_vectors() {
        assert_eq!(margin(&[2.0, -1.0], 0).unwrap(), 3.0);
        assert_eq!(margin(&[2.0, -1.0], 1).unwrap(), -3.0);
        assert_eq!(margin(&[1.0, 5.0, 2.0], 1).unwrap(), 3.0);
        assert!(margin(&[1.0, 2.0], 2).is_err(), "class index out of range");
    }

    #[test]
    fn binary_margin_matches_logit_margin() {
        // With two logits, f[y] - f[other] equals y * (f[+1] - f[-1]).
        let cases = [([0.3, -1.2], 1i8), ([0.3, -1.2], -1), ([-2.0, 0.5], 1)];
        for (logits, y) in cases {
            let e = LabeledExample::new(vec![0.0], y);
            let via_logits = margin(&logits, e.class_index()).unwrap();
            let via_binary = y as f64 * (logits[1] - logits[0]);
            assert!((via_logits - via_binary).abs() < 1e-15);
        }
    }

    #[test]
    fn empirical_loss_hand_computed() {
        let data = Dataset::new(vec![
            LabeledExample::new(vec![1.0], 1),
            LabeledExample::new(vec![-1.0], 1),
            LabeledExample::new(vec![-1.0], -1),
        ])
        .unwrap();
        // predict = identity on the single coordinate.
        let loss = empirical_loss(|x| x[0], &data, LossKind::ZeroOne).unwrap();
        assert!((loss - 1.0 / 3.0).abs() < 1e-15, "one of three is wrong");
    }

    #[test]
    fn mc_constant_loss_has_zero_std_err() {
        let stream = RngStream::new(1, 2);
        let (est, se) = mc_expected_loss(
            |_| 1.0,
            |_| LabeledExample::new(vec![0.0], 1),
            500,
            LossKind::ZeroOne,
            stream,
        )
        .unwrap();
        assert_eq!(est, 0.0, "prediction 1.0 against label +1 never errs");
        assert_eq!(se, 0.0, "constant loss sequence has no spread");
    }

    #[test]
    fn mc_agrees_with_empirical_on_uniform_resampling() {
        let data = Dataset::new(vec![
            LabeledExample::new(vec![0.8], 1),
            LabeledExample::new(vec![-0.4], 1),
            LabeledExample::new(vec![0.1], -1),
            LabeledExample::new(vec![-0.9], -1),
        ])
        .unwrap();
        let kind = LossKind::Ramp { gamma: 1.0 };
        let exact = empirical_loss(|x| x[0], &data, kind).unwrap();
        let n = 200_000;
        let (est, se) = mc_expected_loss(
            |x| x[0],
            |rng| {
                use rand::Rng;
                data.examples()[rng.random_range(0..data.len())].clone()
            },
            n,
            kind,
            RngStream::new(7, 0),
        )
        .unwrap();
        assert!(
            (est - exact).abs() < 4.0 * se.max(1e-4),
            "MC estimate {est} should approach the exact mean {exact} (se {se})"
        );
    }
}
