//! Exponential convergence fits `|mean(N) - L| ~ C e^(lambda N)`.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceFit {
    pub limit: f64,
    /// `lambda`; `-inf` for a constant series.
    pub exponent: f64,
    /// `ln |C|`.
    pub log_prefactor: f64,
    /// Sum of squared residuals of `mean(N)` about the fitted curve.
    pub residual: f64,
}

/// Least-squares line through `(x, y)`: returns `(intercept, slope, sse)`.
fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let sse = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    (intercept, slope, sse)
}

/// For a fixed exponent the model `L + C e^(lambda N)` is linear in `L, C`.
fn project(xs: &[f64], ys: &[f64], lambda: f64) -> (f64, f64, f64) {
    // Centre the regressor at the first point to keep it O(1).
    let x0 = xs[0];
    let zs: Vec<f64> = xs.iter().map(|x| (lambda * (x - x0)).exp()).collect();
    line_fit(&zs, ys)
}

/// Fits all points of `series`.
pub fn fit_convergence(series: &[(u32, f64)]) -> Result<ConvergenceFit> {
    fit_convergence_tail(series, 0)
}

/// Fits `mean(N) = L + C e^(lambda N)` by least squares after dropping the
/// first `skip` points. `L` and `C` are solved exactly for each `lambda`;
/// `lambda` is found by a grid scan and golden-section refinement.
pub fn fit_convergence_tail(series: &[(u32, f64)], skip: usize) -> Result<ConvergenceFit> {
    let pts = series.get(skip..).unwrap_or(&[]);
    if pts.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "a convergence fit needs at least 4 points, got {}",
            pts.len()
        )));
    }
    let xs: Vec<f64> = pts.iter().map(|p| f64::from(p.0)).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= 1e-12 * hi.abs().max(1.0) {
        return Ok(ConvergenceFit {
            limit: ys[0],
            exponent: f64::NEG_INFINITY,
            log_prefactor: f64::NEG_INFINITY,
            residual: 0.0,
        });
    }

    let sse = |l: f64| project(&xs, &ys, l).2;
    let (a, b) = (-LAMBDA_MAX, -LAMBDA_MIN);
    let steps = 2000;
    let h = (b - a) / f64::from(steps);
    let (best_i, _) = (0..=steps)
        .map(|i| (i, sse(a + h * f64::from(i))))
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    let mut l = a + h * (f64::from(best_i) - 1.0).max(0.0);
    let mut r = (a + h * (f64::from(best_i) + 1.0)).min(b);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = r - phi * (r - l);
    let mut d = l + phi * (r - l);
    let (mut fc, mut fd) = (sse(c), sse(d));
    for _ in 0..100 {
        if fc < fd {
            r = d;
            d = c;
            fd = fc;
            c = r - phi * (r - l);
            fc = sse(c);
        } else {
            l = c;
            c = d;
            fc = fd;
            d = l + phi * (r - l);
            fd = sse(d);
        }
    }
    let lambda = if fc < fd { c } else { d };
    let (limit, scale, residual) = project(&xs, &ys, lambda);
    Ok(ConvergenceFit {
        limit,
        exponent: lambda,
        log_prefactor: scale.abs().ln() - lambda * xs[0],
        residual,
    })
}

/// Exponents are searched in `[-LAMBDA_MAX, -LAMBDA_MIN]`.
const LAMBDA_MIN: f64 = 1e-3;
const LAMBDA_MAX: f64 = 5.0;
