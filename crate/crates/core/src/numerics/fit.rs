//! Regression, extrapolation, and bracketing helpers.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

/// Ordinary least squares `y = slope * x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidParameter("linear fit needs at least two matched points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("degenerate abscissae".into()));
    }
    let slope = sxy / sxx;
    Ok(LineFit { slope, intercept: my - slope * mx })
}

/// Slope of `log|y|` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    if ly.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("log-log fit of a vanishing quantity".into()));
    }
    linear_fit(&lx, &ly)
}

/// Richardson extrapolation of samples `f(r_i)` assumed to behave like
/// `L + a_1 / r + ... + a_order / r^order`. Uses the last `order + 1` samples
/// and solves the Vandermonde system in `1/r` exactly.
pub fn richardson_in_inverse_radius(r: &[f64], f: &[f64], order: usize) -> Result<f64> {
    if r.len() != f.len() || r.len() < order + 1 {
        return Err(Error::InvalidParameter(format!(
            "Richardson order {order} needs {} samples, got {}",
            order + 1,
            r.len()
        )));
    }
    let k = order + 1;
    let rs = &r[r.len() - k..];
    let fs = &f[f.len() - k..];
    // Neville at h = 0 with h_i = 1/r_i
    let h: Vec<f64> = rs.iter().map(|v| 1.0 / v).collect();
    let mut p = fs.to_vec();
    for level in 1..k {
        for i in (level..k).rev() {
            let (hi, hj) = (h[i], h[i - level]);
            p[i] = (hj * p[i] - hi * p[i - 1]) / (hj - hi);
        }
    }
    Ok(p[k - 1])
}

/// Bisection for a root of a function with a sign change on `[a, b]`.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::Bracket(format!("no sign change on [{a}, {b}]: f = ({fa}, {fb})")));
    }
    for _ in 0..300 {
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm == 0.0 || (b - a).abs() <= tol * mid.abs().max(1e-300) {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}
