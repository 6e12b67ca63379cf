//! Goodness-of-fit and two-sample tests used on Monte Carlo output.

use statrs::distribution::{Discrete, Hypergeometric};

use crate::error::{Error, Result};

/// Asymptotic Kolmogorov tail `P(K > lambda)`.
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = f64::from(k);
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn ks_p_value(d: f64, n_eff: f64) -> f64 {
    let s = n_eff.sqrt();
    kolmogorov_tail((s + 0.12 + 0.11 / s) * d)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample KS test of values in `[0, 1)` against the uniform law.
pub fn ks_uniform(values: &[f64]) -> Result<TestResult> {
    if values.is_empty() {
        return Err(Error::Empty("KS test needs at least one value".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let d = v
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let i = i as f64;
            ((i + 1.0) / n - x).max(x - i / n)
        })
        .fold(0.0, f64::max);
    Ok(TestResult {
        statistic: d,
        p_value: ks_p_value(d, n),
    })
}

/// Two-sample KS test.
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> Result<TestResult> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Empty("KS test needs two non-empty samples".into()));
    }
    let mut a = x.to_vec();
    let mut b = y.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let t = a[i].min(b[j]);
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(TestResult {
        statistic: d,
        p_value: ks_p_value(d, n * m / (n + m)),
    })
}

/// Two-sided Fisher exact test for equal success probabilities, given
/// `k1` successes out of `n1` and `k2` out of `n2`.
pub fn fisher_exact(k1: u64, n1: u64, k2: u64, n2: u64) -> Result<TestResult> {
    if k1 > n1 || k2 > n2 || n1 == 0 || n2 == 0 {
        return Err(Error::InvalidArgument(format!("bad counts {k1}/{n1}, {k2}/{n2}")));
    }
    let total = n1 + n2;
    let successes = k1 + k2;
    let diff = (k1 as f64 / n1 as f64 - k2 as f64 / n2 as f64).abs();
    if successes == 0 || successes == total {
        return Ok(TestResult {
            statistic: diff,
            p_value: 1.0,
        });
    }
    let h = Hypergeometric::new(total, successes, n1)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let lo = successes.saturating_sub(n2);
    let hi = successes.min(n1);
    let observed = h.ln_pmf(k1);
    let tol = 1e-7;
    let mut p = 0.0;
    for k in lo..=hi {
        let lp = h.ln_pmf(k);
        if lp <= observed + tol {
            p += lp.exp();
        }
    }
    Ok(TestResult {
        statistic: diff,
        p_value: p.min(1.0),
    })
}

/// Holm step-down adjusted p-values, in the input order.
pub fn holm(p_values: &[f64]) -> Vec<f64> {
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| p_values[i].total_cmp(&p_values[j]));
    let mut adjusted = vec![0.0; m];
    let mut running = 0.0f64;
    for (rank, &i) in order.iter().enumerate() {
        let a = ((m - rank) as f64 * p_values[i]).min(1.0);
        running = running.max(a);
        adjusted[i] = running;
    }
    adjusted
}

/// Bonferroni adjusted p-values.
pub fn bonferroni(p_values: &[f64]) -> Vec<f64> {
    let m = p_values.len() as f64;
    p_values.iter().map(|p| (p * m).min(1.0)).collect()
}
