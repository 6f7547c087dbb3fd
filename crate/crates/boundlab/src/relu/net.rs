//! Two-layer rectifier network with two output logits.
//!
//! The net keeps a frozen copy of its parameters at initialization.
//! Every capacity bound audited downstream is
//! distance-from-initialization aware, so the pair (current, initial)
//! is the unit of state that moves through training, snapshots, and
//! audits together.
//!
//! Both layers carry bias vectors, initialized to zero. Without them
//! the network is positively homogeneous in its input (f(cx) = c f(x)
//! for c > 0), its decision regions are cones through the origin, and
//! no training can tell two concentric spheres apart; the bias terms
//! are what let the learned boundary sit between the radii.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::losses::Dataset;
use crate::numerics::{standard_normal, Matrix, RngStream};

/// The nets here always carry two logits; labels are +1/-1 and map to
/// logit indices 1/0.
pub const LOGITS: usize = 2;

#[derive(Debug, Clone)]
pub struct TwoLayerNet {
    w1: Matrix,
    b1: Vec<f64>,
    w2: Matrix,
    b2: Vec<f64>,
    init_w1: Matrix,
    init_b1: Vec<f64>,
    init_w2: Matrix,
    init_b2: Vec<f64>,
}

impl TwoLayerNet {
    /// Gaussian initialization, weight entries N(0, scale^2 / fan_in)
    /// per layer, biases zero. The two layers draw from independent
    /// derived streams.
    pub fn init(dim: usize, width: usize, scale: f64, stream: RngStream) -> Result<Self> {
        if dim == 0 || width == 0 {
            return Err(Error::BadParameter(format!(
                "network shape must be positive, got dim {dim}, width {width}"
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::BadParameter(format!("init scale must be positive, got {scale}")));
        }
        let mut rng1 = stream.derive(0).rng();
        let sd1 = scale / (dim as f64).sqrt();
        let w1 = Matrix::from_fn(width, dim, |_, _| sd1 * standard_normal(&mut rng1));
        let mut rng2 = stream.derive(1).rng();
        let sd2 = scale / (width as f64).sqrt();
        let w2 = Matrix::from_fn(LOGITS, width, |_, _| sd2 * standard_normal(&mut rng2));
        Self::with_biases(w1, vec![0.0; width], w2, vec![0.0; LOGITS])
    }

    /// Assemble a net from explicit weights with zero biases; the given
    /// parameters double as the recorded initialization.
    pub fn from_parts(w1: Matrix, w2: Matrix) -> Result<Self> {
        let width = w1.rows();
        Self::with_biases(w1, vec![0.0; width], w2, vec![0.0; LOGITS])
    }

    /// Assemble a net from explicit weights and biases; the given
    /// parameters double as the recorded initialization.
    pub fn with_biases(w1: Matrix, b1: Vec<f64>, w2: Matrix, b2: Vec<f64>) -> Result<Self> {
        if w2.cols() != w1.rows() || w2.rows() != LOGITS {
            return Err(Error::DimensionMismatch {
                expected: w1.rows(),
                got: w2.cols(),
                context: "second-layer width",
            });
        }
        if b1.len() != w1.rows() {
            return Err(Error::DimensionMismatch {
                expected: w1.rows(),
                got: b1.len(),
                context: "hidden bias length",
            });
        }
        if b2.len() != LOGITS {
            return Err(Error::DimensionMismatch {
                expected: LOGITS,
                got: b2.len(),
                context: "output bias length",
            });
        }
        if b1.iter().chain(&b2).any(|v| !v.is_finite()) {
            return Err(Error::BadParameter("biases must be finite".into()));
        }
        Ok(TwoLayerNet {
            init_w1: w1.clone(),
            init_b1: b1.clone(),
            init_w2: w2.clone(),
            init_b2: b2.clone(),
            w1,
            b1,
            w2,
            b2,
        })
    }

    pub fn dim(&self) -> usize {
        self.w1.cols()
    }

    pub fn width(&self) -> usize {
        self.w1.rows()
    }

    pub fn w1(&self) -> &Matrix {
        &self.w1
    }

    pub fn w2(&self) -> &Matrix {
        &self.w2
    }

    pub fn b1(&self) -> &[f64] {
        &self.b1
    }

    pub fn b2(&self) -> &[f64] {
        &self.b2
    }

    pub fn init_w1(&self) -> &Matrix {
        &self.init_w1
    }

    pub fn init_w2(&self) -> &Matrix {
        &self.init_w2
    }

    pub fn init_b1(&self) -> &[f64] {
        &self.init_b1
    }

    pub fn init_b2(&self) -> &[f64] {
        &self.init_b2
    }

    pub(crate) fn w1_mut(&mut self) -> &mut Matrix {
        &mut self.w1
    }

    pub(crate) fn w2_mut(&mut self) -> &mut Matrix {
        &mut self.w2
    }

    pub(crate) fn b1_mut(&mut self) -> &mut [f64] {
        &mut self.b1
    }

    pub(crate) fn b2_mut(&mut self) -> &mut [f64] {
        &mut self.b2
    }

    /// Hidden activations for a batch of row vectors; the returned
    /// matrix is batch x width, already rectified.
    pub fn hidden_batch(&self, xs: &Matrix) -> Matrix {
        let mut h = xs.matmul_nt(&self.w1);
        for i in 0..h.rows() {
            let row = h.row_mut(i);
            for (v, &b) in row.iter_mut().zip(&self.b1) {
                *v += b;
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
        h
    }

    /// Logits for a batch of row vectors, batch x 2.
    pub fn logits_batch(&self, xs: &Matrix) -> Matrix {
        let mut l = self.hidden_batch(xs).matmul_nt(&self.w2);
        for i in 0..l.rows() {
            let row = l.row_mut(i);
            for (v, &b) in row.iter_mut().zip(&self.b2) {
                *v += b;
            }
        }
        l
    }

    pub fn logits_of(&self, x: &[f64]) -> [f64; LOGITS] {
        let mut h = self.w1.matvec(x);
        for (v, &b) in h.iter_mut().zip(&self.b1) {
            *v += b;
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let l = self.w2.matvec(&h);
        [l[0] + self.b2[0], l[1] + self.b2[1]]
    }

    /// Collapsed binary output, logit(+1) - logit(-1).
    pub fn binary_output(&self, x: &[f64]) -> f64 {
        let l = self.logits_of(x);
        l[1] - l[0]
    }

    /// Margins of every example, in dataset order, evaluated in batches.
    /// The margin of (x, y) is the y-logit minus the other logit, which
    /// for two logits equals y times the collapsed binary output.
    pub fn margins(&self, data: &Dataset) -> Result<Vec<f64>> {
        if data.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: data.dim(),
                context: "margin evaluation input",
            });
        }
        let mut out = Vec::with_capacity(data.len());
        let examples = data.examples();
        for chunk in examples.chunks(256) {
            let xs = Matrix::from_fn(chunk.len(), self.dim(), |i, j| chunk[i].x[j]);
            let logits = self.logits_batch(&xs);
            for (i, e) in chunk.iter().enumerate() {
                out.push(e.y as f64 * (logits.get(i, 1) - logits.get(i, 0)));
            }
        }
        Ok(out)
    }

    /// Euclidean distance of the full parameter vector (weights and
    /// biases) from its recorded initialization.
    pub fn dist_from_init(&self) -> f64 {
        let d1 = self.w1.sub(&self.init_w1).frobenius_norm();
        let d2 = self.w2.sub(&self.init_w2).frobenius_norm();
        let db: f64 = self
            .b1
            .iter()
            .zip(&self.init_b1)
            .chain(self.b2.iter().zip(&self.init_b2))
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        (d1 * d1 + d2 * d2 + db).sqrt()
    }

    /// Euclidean norm of the full parameter vector (weights and biases).
    pub fn dist_from_origin(&self) -> f64 {
        let n1 = self.w1.frobenius_norm();
        let n2 = self.w2.frobenius_norm();
        let nb: f64 = self.b1.iter().chain(&self.b2).map(|v| v * v).sum();
        (n1 * n1 + n2 * n2 + nb).sqrt()
    }

    /// Write the net to a plain-text snapshot. Numbers are printed in
    /// Rust's shortest round-trip form, so load followed by save is
    /// lossless bit for bit.
    pub fn save_snapshot(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        let _ = writeln!(out, "two-layer-net v2");
        let _ = writeln!(out, "dim {} width {} logits {}", self.dim(), self.width(), LOGITS);
        for (name, m) in [
            ("w1", &self.w1),
            ("w2", &self.w2),
            ("init_w1", &self.init_w1),
            ("init_w2", &self.init_w2),
        ] {
            let _ = writeln!(out, "matrix {name} {} {}", m.rows(), m.cols());
            for i in 0..m.rows() {
                let row = m.row(i);
                for (j, v) in row.iter().enumerate() {
                    if j > 0 {
                        out.push(' ');
                    }
                    let _ = write!(out, "{v}");
                }
                out.push('\n');
            }
        }
        for (name, v) in [
            ("b1", &self.b1),
            ("b2", &self.b2),
            ("init_b1", &self.init_b1),
            ("init_b2", &self.init_b2),
        ] {
            let _ = writeln!(out, "vector {name} {}", v.len());
            for (j, x) in v.iter().enumerate() {
                if j > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{x}");
            }
            out.push('\n');
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    /// Read a snapshot produced by [`save_snapshot`].
    pub fn load_snapshot(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        let bad = |msg: &str| Error::SnapshotFormat(msg.to_string());

        if lines.next() != Some("two-layer-net v2") {
            return Err(bad("missing header line 'two-layer-net v2'"));
        }
        let shape = lines.next().ok_or_else(|| bad("missing shape line"))?;
        let parts: Vec<&str> = shape.split_whitespace().collect();
        if parts.len() != 6 || parts[0] != "dim" || parts[2] != "width" || parts[4] != "logits" {
            return Err(bad("shape line must read 'dim D width W logits 2'"));
        }
        let dim: usize = parts[1].parse().map_err(|_| bad("unreadable dim"))?;
        let width: usize = parts[3].parse().map_err(|_| bad("unreadable width"))?;
        if parts[5] != "2" {
            return Err(bad("only two-logit snapshots are supported"));
        }

        let mut read_matrix = |name: &str, rows: usize, cols: usize| -> Result<Matrix> {
            let head = lines.next().ok_or_else(|| bad("truncated snapshot"))?;
            let want = format!("matrix {name} {rows} {cols}");
            if head != want {
                return Err(bad(&format!("expected '{want}', found '{head}'")));
            }
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                let line = lines.next().ok_or_else(|| bad("truncated matrix block"))?;
                for tok in line.split_whitespace() {
                    let v: f64 = tok
                        .parse()
                        .map_err(|_| bad(&format!("unreadable number '{tok}' in {name}")))?;
                    data.push(v);
                }
            }
            if data.len() != rows * cols {
                return Err(bad(&format!("wrong entry count in {name}")));
            }
            Matrix::from_vec(rows, cols, data)
        };

        let w1 = read_matrix("w1", width, dim)?;
        let w2 = read_matrix("w2", LOGITS, width)?;
        let init_w1 = read_matrix("init_w1", width, dim)?;
        let init_w2 = read_matrix("init_w2", LOGITS, width)?;

        let mut read_vector = |name: &str, len: usize| -> Result<Vec<f64>> {
            let head = lines.next().ok_or_else(|| bad("truncated snapshot"))?;
            let want = format!("vector {name} {len}");
            if head != want {
                return Err(bad(&format!("expected '{want}', found '{head}'")));
            }
            let line = lines.next().ok_or_else(|| bad("truncated vector block"))?;
            let vals: std::result::Result<Vec<f64>, _> =
                line.split_whitespace().map(str::parse).collect();
            let vals =
                vals.map_err(|_| bad(&format!("unreadable number in {name}")))?;
            if vals.len() != len {
                return Err(bad(&format!("wrong entry count in {name}")));
            }
            Ok(vals)
        };

        let b1 = read_vector("b1", width)?;
        let b2 = read_vector("b2", LOGITS)?;
        let init_b1 = read_vector("init_b1", width)?;
        let init_b2 = read_vector("init_b2", LOGITS)?;
        Ok(TwoLayerNet { w1, b1, w2, b2, init_w1, init_b1, init_w2, init_b2 })
    }
}
