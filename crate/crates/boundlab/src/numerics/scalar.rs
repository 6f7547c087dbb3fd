//! Log-domain scalar arithmetic and power-law fitting.
//!
//! The exponential-activation experiments produce terms like
//! exp(|z|^2 / 4) whose magnitudes overflow f64 by thousands of orders;
//! everything downstream therefore manipulates logarithms of
//! magnitudes together with explicit signs. `logsumexp` and
//! `signed_log_diff` are the two primitives that keep that arithmetic
//! exact to f64 rounding.

use crate::error::{Error, Result};

/// log(sum_i exp(x_i)), computed by factoring out the maximum so the
/// largest exponential evaluated is exp(0). Safe for inputs with
/// magnitude up to ~1e300. Empty input is an error; a singleton returns
/// its element unchanged.
pub fn logsumexp(xs: &[f64]) -> Result<f64> {
    let m = xs
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if xs.is_empty() {
        return Err(Error::EmptyInput("logsumexp over empty slice"));
    }
    if m == f64::NEG_INFINITY {
        // All terms are exactly zero in linear space.
        return Ok(f64::NEG_INFINITY);
    }
    let sum: f64 = xs.iter().map(|&x| (x - m).exp()).sum();
    Ok(m + sum.ln())
}

/// Given log|a| and log|b| for nonnegative a, b, return the sign and
/// log-magnitude of a - b as `(sign, log|a - b|)` without leaving the
/// log domain. Exact ties return `(0, -inf)`.
///
/// The magnitude uses log(1 - exp(-d)) with d = |log a - log b| > 0,
/// evaluated via `ln_1p(-exp(-d))` for large d and `ln(-expm1(-d))`
/// for small d; the branch point at ln 2 keeps both paths away from
/// catastrophic cancellation.
pub fn signed_log_diff(log_a: f64, log_b: f64) -> (i8, f64) {
    if log_a == log_b {
        return (0, f64::NEG_INFINITY);
    }
    let (sign, hi, lo) = if log_a > log_b { (1, log_a, log_b) } else { (-1, log_b, log_a) };
    if lo == f64::NEG_INFINITY {
        return (sign, hi);
    }
    let d = hi - lo;
    let log_one_minus = if d > std::f64::consts::LN_2 {
        (-(-d).exp()).ln_1p()
    } else {
        (-(-d).exp_m1()).ln()
    };
    (sign, hi + log_one_minus)
}

/// Least-squares power-law fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    /// Fitted exponent: slope of log v against log m.
    pub exponent: f64,
    /// Intercept in log space (natural log of the leading coefficient).
    pub intercept_log: f64,
    /// Coefficient of determination of the log-log regression, in
    /// [0, 1]. Data that are constant in log space fit a zero-slope
    /// line exactly and report 1.
    pub r_squared: f64,
}

/// Fit v ~ C * m^p by ordinary least squares on (ln m, ln v).
/// Requires at least two points, all with m > 0 and v > 0 and at least
/// two distinct m values.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 2 {
        return Err(Error::BadParameter(format!(
            "power-law fit needs at least 2 points, got {}",
            points.len()
        )));
    }
    if let Some(&(m, v)) = points.iter().find(|&&(m, v)| !(m > 0.0 && v > 0.0)) {
        return Err(Error::BadParameter(format!(
            "power-law fit needs strictly positive coordinates, got ({m}, {v})"
        )));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(m, v)| (m.ln(), v.ln())).collect();
    let n = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return Err(Error::BadParameter(
            "power-law fit needs at least two distinct m values".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_tot: f64 = logs.iter().map(|p| (p.1 - mean_y) * (p.1 - mean_y)).sum();
    let ss_res: f64 = logs
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + slope * p.0);
            r * r
        })
        .sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    Ok(SlopeFit { exponent: slope, intercept_log: intercept, r_squared })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logsumexp_matches_naive_on_small_inputs() {
        let xs = [0.3f64, -1.2, 2.4, 0.0];
        let naive = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
        let got = logsumexp(&xs).unwrap();
        assert!((got - naive).abs() < 1e-13, "logsumexp {got} vs naive {naive}");
    }

    #[test]
    fn logsumexp_handles_huge_arguments() {
        // exp(1e8) overflows f64; the factored form must not.
        let got = logsumexp(&[1e8, 1e8]).unwrap();
        let want = 1e8 + std::f64::consts::LN_2;
        assert!((got - want).abs() < 1e-7 * want.abs(), "got {got}, want {want}");
        assert!(got.is_finite());
    }

    #[test]
    fn logsumexp_singleton_and_empty() {
        assert_eq!(logsumexp(&[3.25]).unwrap(), 3.25);
        assert!(logsumexp(&[]).is_err());
    }

    #[test]
    fn signed_log_diff_exact_tie() {
        let (s, lm) = signed_log_diff(5.0, 5.0);
        assert_eq!(s, 0);
        assert_eq!(lm, f64::NEG_INFINITY);
    }

    #[test]
    fn signed_log_diff_recovers_difference() {
        // a = e^2, b = e^1: a - b = e^2 - e, log of which is known.
        let (s, lm) = signed_log_diff(2.0, 1.0);
        assert_eq!(s, 1);
        let want = (2.0f64.exp() - 1.0f64.exp()).ln();
        assert!((lm - want).abs() < 1e-14, "got {lm}, want {want}");
        // Swapped arguments flip the sign, keep the magnitude.
        let (s2, lm2) = signed_log_diff(1.0, 2.0);
        assert_eq!(s2, -1);
        assert_eq!(lm2, lm);
    }

    #[test]
    fn signed_log_diff_close_arguments_stay_accurate() {
        // log-space gap near 1e-9: linear-space subtraction would lose
        // most digits, the log-domain route must not. The reference
        // value uses the gap as actually represented, a - b =
        // e^lb (e^gap - 1).
        let la = 10.0;
        let lb = 10.0 - 1e-9;
        let gap = la - lb;
        let (s, lm) = signed_log_diff(la, lb);
        assert_eq!(s, 1);
        let want = lb + gap.exp_m1().ln();
        assert!((lm - want).abs() < 1e-12, "got {lm}, want {want}");
    }

    #[test]
    fn slope_fit_exact_power_law() {
        let pts: Vec<(f64, f64)> =
            (1..=6).map(|k| { let m = (1 << k) as f64; (m, 3.0 * m.powf(0.5)) }).collect();
        let fit = fit_loglog_slope(&pts).unwrap();
        assert!((fit.exponent - 0.5).abs() < 1e-10, "exponent {}", fit.exponent);
        assert!((fit.intercept_log - 3.0f64.ln()).abs() < 1e-10);
        assert!(fit.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn slope_fit_constant_data_is_flat_with_full_r2() {
        let fit = fit_loglog_slope(&[(1.0, 4.0), (10.0, 4.0), (100.0, 4.0)]).unwrap();
        assert_eq!(fit.exponent, 0.0);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn slope_fit_rejects_bad_inputs() {
        assert!(fit_loglog_slope(&[(1.0, 1.0)]).is_err(), "single point");
        assert!(fit_loglog_slope(&[(1.0, 1.0), (2.0, -1.0)]).is_err(), "negative value");
        assert!(fit_loglog_slope(&[(2.0, 1.0), (2.0, 3.0)]).is_err(), "degenerate m values");
    }
}
