//! Dense row-major matrices with exactly the operations the laboratory
//! needs: products in the three orientations the SGD trainer uses, and
//! the norms that appear in capacity bounds.
//!
//! Norm conventions:
//! * `spectral_norm` is the largest singular value, computed by power
//!   iteration on the Gram operator (no dependence on an external
//!   factorization; the test suite cross-checks it against a Jacobi
//!   eigen-decomposition oracle).
//! * `norm21` is the (2,1) group norm read column-wise: the l2 norm of
//!   each column, summed across columns. Columns are the natural group
//!   here because a column of a layer matrix collects the weights
//!   attached to one input unit.
//!
//! Every reduction runs in a fixed ascending-index order, so results
//! are bitwise reproducible run to run.

use crate::error::{Error, Result};
use crate::numerics::rng::RngStream;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Dot product with four accumulators; the unroll keeps the FP add
/// chains short enough for the compiler to vectorize.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len();
    let head = n - n % 4;
    let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    let mut i = 0;
    while i < head {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
        i += 4;
    }
    while i < n {
        s0 += a[i] * b[i];
        i += 1;
    }
    (s0 + s1) + (s2 + s3)
}

/// `acc += s * src`, the workhorse of the transposed products.
#[inline]
pub fn axpy(acc: &mut [f64], s: f64, src: &[f64]) {
    debug_assert_eq!(acc.len(), src.len());
    for (a, &x) in acc.iter_mut().zip(src) {
        *a += s * x;
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Build from row-major data; rejects non-finite entries and shape
    /// mismatches.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
                context: "matrix data length",
            });
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::BadParameter("matrix entries must be finite".into()));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::BadParameter("ragged rows in matrix literal".into()));
        }
        Matrix::from_vec(r, c, rows.into_iter().flatten().collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    /// `self += s * other`, entrywise.
    pub fn add_scaled(&mut self, other: &Matrix, s: f64) {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "add_scaled shape mismatch"
        );
        axpy(&mut self.data, s, &other.data);
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "sub shape mismatch");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    /// C = A B.
    pub fn matmul(&self, b: &Matrix) -> Matrix {
        assert_eq!(self.cols, b.rows, "matmul inner dimension mismatch");
        let mut out = Matrix::zeros(self.rows, b.cols);
        for i in 0..self.rows {
            let arow = self.row(i);
            let orow = out.row_mut(i);
            for (k, &aik) in arow.iter().enumerate() {
                axpy(orow, aik, b.row(k));
            }
        }
        out
    }

    /// C = A B^T; the fast path when both operands are row-major and
    /// the reduction runs along rows of each.
    pub fn matmul_nt(&self, b: &Matrix) -> Matrix {
        assert_eq!(self.cols, b.cols, "matmul_nt inner dimension mismatch");
        let mut out = Matrix::zeros(self.rows, b.rows);
        for i in 0..self.rows {
            let arow = self.row(i);
            let orow = out.row_mut(i);
            for j in 0..b.rows {
                orow[j] = dot(arow, b.row(j));
            }
        }
        out
    }

    /// C = A^T B. Output row j accumulates sum_i A[i][j] * B[i] with the
    /// row index i ascending, so the order is fixed. Column j of A is
    /// gathered first; that way each output row is finished in one pass
    /// and the sweep stays over B, which in the gradient computations is
    /// the small operand. Exact zero coefficients are skipped, which the
    /// rectifier mask produces in bulk.
    pub fn matmul_tn(&self, b: &Matrix) -> Matrix {
        assert_eq!(self.rows, b.rows, "matmul_tn inner dimension mismatch");
        let mut out = Matrix::zeros(self.cols, b.cols);
        let mut col = vec![0.0; self.rows];
        for j in 0..self.cols {
            for (i, c) in col.iter_mut().enumerate() {
                *c = self.get(i, j);
            }
            let orow = out.row_mut(j);
            for (i, &aij) in col.iter().enumerate() {
                if aij != 0.0 {
                    axpy(orow, aij, b.row(i));
                }
            }
        }
        out
    }

    /// y = M x.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "matvec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// y = M^T x, accumulated row by row to stay cache-friendly.
    pub fn matvec_t(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, x.len(), "matvec_t dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            axpy(&mut out, xi, self.row(i));
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        dot(&self.data, &self.data).sqrt()
    }

    /// (2,1) group norm: l2 norm of each column, summed across columns.
    pub fn norm21(&self) -> f64 {
        let mut sq = vec![0.0f64; self.cols];
        for i in 0..self.rows {
            for (j, &v) in self.row(i).iter().enumerate() {
                sq[j] += v * v;
            }
        }
        sq.iter().map(|s| s.sqrt()).sum()
    }

    /// Largest singular value via power iteration on the Gram operator
    /// of the smaller side (M^T M or M M^T).
    ///
    /// The start vector is the deterministic normalized all-ones
    /// vector. If the iteration stalls (the image vanishes, the
    /// estimate freezes immediately because an exact eigenvector start
    /// can park the iteration on a non-dominant eigenvalue, or half the
    /// budget passes without convergence) it restarts once from a
    /// fixed pseudo-random vector, so the result is still a pure
    /// function of the input. Convergence means the Rayleigh-quotient
    /// estimate moved by at most `tol` in relative terms. Exceeding
    /// `max_iter` returns an error carrying the best estimate.
    pub fn spectral_norm(&self, tol: f64, max_iter: usize) -> Result<f64> {
        if !(tol > 0.0) {
            return Err(Error::BadParameter(format!("tol must be positive, got {tol}")));
        }
        if max_iter == 0 {
            return Err(Error::BadParameter("max_iter must be at least 1".into()));
        }
        if self.rows == 0 || self.cols == 0 {
            return Ok(0.0);
        }
        if self.data.iter().all(|&v| v == 0.0) {
            return Ok(0.0);
        }

        let n = self.rows.min(self.cols);
        let ones = vec![1.0 / (n as f64).sqrt(); n];
        match self.power_iterate(&ones, tol, max_iter) {
            PowerOutcome::Converged { sigma, iterations } if iterations > 3 => Ok(sigma),
            first => {
                // Stalled, unconverged, or suspiciously instant: verify
                // from a fixed pseudo-random direction and keep the max.
                let mut rng = RngStream::new(0x5eed_cafe, 0x0f1e_2d3c).rng();
                let mut v: Vec<f64> =
                    (0..n).map(|_| super::rng::standard_normal(&mut rng)).collect();
                let norm = dot(&v, &v).sqrt();
                for x in &mut v {
                    *x /= norm;
                }
                let best_first = match first {
                    PowerOutcome::Converged { sigma, .. } => sigma,
                    PowerOutcome::Stalled { sigma } => sigma,
                };
                match self.power_iterate(&v, tol, max_iter) {
                    PowerOutcome::Converged { sigma, .. } => Ok(sigma.max(best_first)),
                    PowerOutcome::Stalled { sigma } => Err(Error::NoConvergence {
                        iterations: max_iter,
                        best_estimate: sigma.max(best_first),
                    }),
                }
            }
        }
    }

    /// One power-iteration run on the smaller Gram operator starting
    /// from `v0`. Never restarts by itself.
    fn power_iterate(&self, v0: &[f64], tol: f64, max_iter: usize) -> PowerOutcome {
        let tall = self.rows >= self.cols; // iterate in the column space if tall
        let mut v = v0.to_vec();
        let mut sigma_prev = -1.0f64;
        for it in 0..max_iter {
            // w = Gram * v through two rectangular products.
            let w = if tall {
                self.matvec_t(&self.matvec(&v))
            } else {
                self.matvec(&self.matvec_t(&v))
            };
            let lambda = dot(&v, &w); // Rayleigh quotient; v is unit
            let wnorm = dot(&w, &w).sqrt();
            if wnorm == 0.0 {
                // v is in the kernel; only a restart can make progress.
                return PowerOutcome::Stalled { sigma: sigma_prev.max(0.0).sqrt() };
            }
            let sigma = lambda.max(0.0).sqrt();
            if sigma_prev >= 0.0 && (sigma - sigma_prev).abs() <= tol * sigma.max(f64::MIN_POSITIVE)
            {
                return PowerOutcome::Converged { sigma, iterations: it + 1 };
            }
            sigma_prev = sigma;
            for (x, &wi) in v.iter_mut().zip(&w) {
                *x = wi / wnorm;
            }
        }
        PowerOutcome::Stalled { sigma: sigma_prev.max(0.0).sqrt() }
    }
}

enum PowerOutcome {
    Converged { sigma: f64, iterations: usize },
    Stalled { sigma: f64 },
}
