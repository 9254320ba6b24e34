//! Least-squares fits used by the sweeps: power laws, exponential rates and
//! algebraic tail extrapolation.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub max_abs_residual: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!("fit with {} abscissae and {} values", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::DegenerateFit("need at least two points".into()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateFit("non-finite sample".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("zero variance in abscissae".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let res: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - (intercept + slope * a)).collect();
    let ss_res: f64 = res.iter().map(|r| r * r).sum();
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    let max_abs_residual = res.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
    Ok(LinearFit { slope, intercept, r_squared, max_abs_residual })
}

/// Slope of `ln value` against `ln tau`.
pub fn power_law_fit(tau: &[f64], values: &[f64]) -> Result<LinearFit> {
    check_positive(tau)?;
    check_positive(values)?;
    let lx: Vec<f64> = tau.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly)
}

/// Slope of `ln value` against `tau` (the exponential rate, negative for decay).
pub fn exp_rate_fit(tau: &[f64], values: &[f64]) -> Result<LinearFit> {
    check_positive(values)?;
    let ly: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    linear_fit(tau, &ly)
}

fn check_positive(v: &[f64]) -> Result<()> {
    if v.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::DegenerateFit("logarithm of a non-positive value".into()));
    }
    Ok(())
}

/// `n` log-spaced points from `a` to `b` inclusive.
pub fn log_space(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                b
            } else {
                (la + (lb - la) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Result of fitting `E(tau) = L + C tau^(-beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TailFit {
    pub limit: C64,
    pub coefficient: C64,
    pub beta: f64,
    pub rms_residual: f64,
}

fn tail_ls(tau: &[f64], e: &[C64], beta: f64) -> (C64, C64, f64) {
    // Complex least squares in (L, C) with real design [1, tau^-beta].
    let n = tau.len() as f64;
    let g: Vec<f64> = tau.iter().map(|t| t.powf(-beta)).collect();
    let sg: f64 = g.iter().sum();
    let sgg: f64 = g.iter().map(|v| v * v).sum();
    let se: C64 = e.iter().sum();
    let sge: C64 = g.iter().zip(e).map(|(a, b)| b * *a).sum();
    let det = n * sgg - sg * sg;
    if det.abs() <= 1e-300 {
        let l = se / n;
        let r = e.iter().map(|v| (v - l).norm_sqr()).sum::<f64>();
        return (l, C64::new(0.0, 0.0), r);
    }
    let c = (sge * n - se * sg) / det;
    let l = (se - c * sg) / n;
    let r = g.iter().zip(e).map(|(gi, ei)| (ei - l - c * *gi).norm_sqr()).sum::<f64>();
    (l, c, r)
}

/// Fit `L + C tau^(-beta)` by linear least squares in `(L, C)` for each `beta`,
/// with a one-dimensional search over `beta` in `[beta_lo, beta_hi]`.
pub fn fit_algebraic_tail(tau: &[f64], e: &[C64], beta_lo: f64, beta_hi: f64) -> Result<TailFit> {
    if tau.len() != e.len() {
        return Err(Error::Dimension("tail fit lengths differ".into()));
    }
    if tau.len() < 3 {
        return Err(Error::DegenerateFit("tail fit needs at least three points".into()));
    }
    if e.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::DegenerateFit("non-finite estimate".into()));
    }
    let obj = |b: f64| tail_ls(tau, e, b).2;
    let grid = 200;
    let mut best = beta_lo;
    let mut best_val = f64::INFINITY;
    for i in 0..=grid {
        let b = beta_lo + (beta_hi - beta_lo) * i as f64 / grid as f64;
        let v = obj(b);
        if v < best_val {
            best_val = v;
            best = b;
        }
    }
    // Golden-section refinement around the best grid point.
    let step = (beta_hi - beta_lo) / grid as f64;
    let (mut lo, mut hi) = ((best - step).max(beta_lo), (best + step).min(beta_hi));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (obj(x1), obj(x2));
    for _ in 0..80 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = obj(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = obj(x2);
        }
    }
    let beta = 0.5 * (lo + hi);
    let (limit, coefficient, r) = tail_ls(tau, e, beta);
    Ok(TailFit { limit, coefficient, beta, rms_residual: (r / tau.len() as f64).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_and_rate() {
        let tau = log_space(1.0, 100.0, 7);
        let p: Vec<f64> = tau.iter().map(|t| t.powi(-2)).collect();
        assert!((power_law_fit(&tau, &p).unwrap().slope + 2.0).abs() < 1e-12);
        let lin: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let e: Vec<f64> = lin.iter().map(|t| (-3.0 * t).exp()).collect();
        assert!((exp_rate_fit(&lin, &e).unwrap().slope + 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_variance_is_degenerate() {
        assert!(matches!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn recovers_algebraic_tail() {
        let tau = log_space(10.0, 400.0, 12);
        let l = C64::new(1.5, -0.25);
        let c = C64::new(-3.0, 2.0);
        let e: Vec<C64> = tau.iter().map(|t| l + c * t.powf(-1.3)).collect();
        let f = fit_algebraic_tail(&tau, &e, 0.05, 4.0).unwrap();
        assert!((f.limit - l).norm() < 1e-8);
        assert!((f.beta - 1.3).abs() < 1e-6);
    }
}
