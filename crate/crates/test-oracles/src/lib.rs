//! Independent reference implementations for cross-checking the main
//! library in tests.
//!
//! Everything in this crate trades speed for obviousness: the spectral
//! norm goes through a full Jacobi eigen-decomposition of the Gram
//! matrix, gradients come from central finite differences, and the
//! two-sample check is a plain Kolmogorov-Smirnov statistic. None of it
//! shares code with the implementations under test, which is the point:
//! a bug would have to be made twice, in two different algorithms, to
//! slip through.

/// Largest singular value of a row-major `rows x cols` matrix, computed
/// by Jacobi eigen-decomposition of M^T M (or M M^T, whichever is
/// smaller). Cubic and unapologetic about it; intended for matrices up
/// to a few hundred rows.
pub fn spectral_norm_via_jacobi(data: &[f64], rows: usize, cols: usize) -> f64 {
    assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    // Build the smaller Gram matrix so the O(n^3) sweep stays cheap.
    let n = rows.min(cols);
    let mut gram = vec![0.0f64; n * n];
    if cols <= rows {
        // G = M^T M
        for i in 0..cols {
            for j in i..cols {
                let mut s = 0.0;
                for r in 0..rows {
                    s += data[r * cols + i] * data[r * cols + j];
                }
                gram[i * n + j] = s;
                gram[j * n + i] = s;
            }
        }
    } else {
        // G = M M^T
        for i in 0..rows {
            for j in i..rows {
                let mut s = 0.0;
                for c in 0..cols {
                    s += data[i * cols + c] * data[j * cols + c];
                }
                gram[i * n + j] = s;
                gram[j * n + i] = s;
            }
        }
    }
    let eigs = jacobi_eigenvalues(&mut gram, n);
    let lambda_max = eigs.into_iter().fold(0.0f64, f64::max);
    lambda_max.max(0.0).sqrt()
}

/// Eigenvalues of a symmetric `n x n` matrix by the cyclic Jacobi
/// method. The input buffer is destroyed. Sweeps until every
/// off-diagonal entry is below `1e-14 * max(1, |A|_F)`.
pub fn jacobi_eigenvalues(a: &mut [f64], n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n, "matrix must be square");
    if n == 0 {
        return Vec::new();
    }
    let frob: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let tol = 1e-14 * frob.max(1.0);
    for _sweep in 0..200 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[p * n + q].abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= tol * 1e-2 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                // Classic stable rotation formulas (Golub & Van Loan).
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

/// Central-difference gradient of `f` at `x`: component k gets
/// (f(x + h e_k) - f(x - h e_k)) / 2h. The probe vector is restored
/// between evaluations, so `f` sees only single-coordinate bumps.
pub fn finite_difference_gradient<F>(mut f: F, x: &[f64], h: f64) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut probe = x.to_vec();
    let mut grad = vec![0.0f64; x.len()];
    for k in 0..x.len() {
        let orig = probe[k];
        probe[k] = orig + h;
        let up = f(&probe);
        probe[k] = orig - h;
        let down = f(&probe);
        probe[k] = orig;
        grad[k] = (up - down) / (2.0 * h);
    }
    grad
}

/// Relative disagreement between two gradient vectors:
/// |a - b| / max(|a|, |b|, 1e-12).
pub fn gradient_relative_error(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "gradient length mismatch");
    let diff: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let na: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    diff / na.max(nb).max(1e-12)
}

/// Two-sample Kolmogorov-Smirnov statistic: sup_t |F_a(t) - F_b(t)|
/// over the empirical CDFs.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "KS needs nonempty samples");
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).expect("NaN in KS sample"));
    sb.sort_by(|x, y| x.partial_cmp(y).expect("NaN in KS sample"));
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < sa.len() && j < sb.len() {
        let t = sa[i].min(sb[j]);
        while i < sa.len() && sa[i] <= t {
            i += 1;
        }
        while j < sb.len() && sb[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Critical value for rejecting "same distribution" at level alpha=0.001;
/// samples with KS statistic below this are indistinguishable for our
/// purposes.
pub fn ks_critical(n_a: usize, n_b: usize) -> f64 {
    let (na, nb) = (n_a as f64, n_b as f64);
    // c(alpha) = sqrt(-ln(alpha/2)/2); alpha = 0.001 gives 1.95.
    1.95 * ((na + nb) / (na * nb)).sqrt()
}
