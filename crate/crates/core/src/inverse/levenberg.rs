use serde::{Deserialize, Serialize};

use crate::linalg::{solve_dense, DenseMatrix};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct LevenbergOptions {
    pub max_iter: usize,
    /// Forward-difference increment in scaled units.
    pub fd_step: f64,
    /// Initial damping relative to the Gram diagonal.
    pub damping: f64,
    /// Stop when the scaled step falls below this.
    pub step_tol: f64,
    /// Stop when an accepted step lowers the cost by less than this fraction.
    pub cost_tol: f64,
}

impl Default for LevenbergOptions {
    fn default() -> Self {
        Self { max_iter: 40, fd_step: 1e-4, damping: 1e-3, step_tol: 1e-7, cost_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LevenbergResult {
    pub x: Vec<f64>,
    /// Squared residual norm at `x`.
    pub cost: f64,
    pub history: Vec<f64>,
    pub evaluations: usize,
    pub iterations: usize,
}

/// Levenberg-Marquardt on a real residual map with forward-difference Jacobians.
///
/// Unknowns are measured in units of `scale`. `residual` returns `None` for infeasible
/// points, which are treated as rejected steps.
pub fn levenberg_marquardt<F>(mut residual: F, x0: &[f64], scale: &[f64], opts: &LevenbergOptions) -> Option<LevenbergResult>
where
    F: FnMut(&[f64]) -> Option<Vec<f64>>,
{
    let n = x0.len();
    let mut evaluations = 1;
    let mut x = x0.to_vec();
    let mut r = residual(&x)?;
    let sq = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();
    let mut cost = sq(&r);
    let mut history = vec![cost];
    let mut mu = opts.damping;
    let mut iterations = 0;
    while iterations < opts.max_iter && cost > 0.0 {
        iterations += 1;
        let mut j = DenseMatrix::zeros(r.len(), n);
        for k in 0..n {
            let mut xp = x.clone();
            xp[k] += opts.fd_step * scale[k];
            evaluations += 1;
            // An infeasible forward point gets a backward difference instead.
            let (rp, sign) = match residual(&xp) {
                Some(rp) => (rp, 1.0),
                None => {
                    xp[k] = x[k] - opts.fd_step * scale[k];
                    evaluations += 1;
                    (residual(&xp)?, -1.0)
                }
            };
            for i in 0..r.len() {
                j[(i, k)] = C64::new(sign * (rp[i] - r[i]) / opts.fd_step, 0.0);
            }
        }
        let neg: Vec<C64> = r.iter().map(|v| C64::new(-v, 0.0)).collect();
        let (gram, rhs) = j.normal_equations(&neg);
        let mut accepted = None;
        for _ in 0..10 {
            let mut a = gram.clone();
            for i in 0..n {
                a[(i, i)] += mu * gram[(i, i)].re.max(1e-12);
            }
            let Ok(dy) = solve_dense(&a, &rhs) else {
                mu *= 4.0;
                continue;
            };
            let xn: Vec<f64> = x.iter().zip(&dy).zip(scale).map(|((xi, d), s)| xi + d.re * s).collect();
            evaluations += 1;
            if let Some(rn) = residual(&xn) {
                let cn = sq(&rn);
                if cn < cost {
                    let step = dy.iter().map(|d| d.re * d.re).sum::<f64>().sqrt();
                    accepted = Some((xn, rn, cn, step));
                    mu = (mu / 3.0).max(1e-9);
                    break;
                }
            }
            mu *= 4.0;
        }
        let Some((xn, rn, cn, step)) = accepted else { break };
        let gain = (cost - cn) / cost;
        x = xn;
        r = rn;
        cost = cn;
        history.push(cost);
        if step < opts.step_tol || gain < opts.cost_tol {
            break;
        }
    }
    Some(LevenbergResult { x, cost, history, evaluations, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fits_an_exponential() {
        // y = 2 exp(-0.7 t) sampled without noise.
        let t: Vec<f64> = (0..20).map(|i| i as f64 * 0.2).collect();
        let y: Vec<f64> = t.iter().map(|t| 2.0 * (-0.7 * t).exp()).collect();
        let res = |p: &[f64]| Some(t.iter().zip(&y).map(|(t, y)| p[0] * (-p[1] * t).exp() - y).collect());
        let r = levenberg_marquardt(res, &[1.0, 0.2], &[1.0, 1.0], &LevenbergOptions::default()).unwrap();
        assert!((r.x[0] - 2.0).abs() < 1e-5 && (r.x[1] - 0.7).abs() < 1e-5, "{:?}", r.x);
    }

    #[test]
    fn infeasible_region_is_avoided() {
        let res = |p: &[f64]| (p[0] > 0.5).then(|| vec![p[0] - 0.4]);
        let r = levenberg_marquardt(res, &[1.0], &[1.0], &LevenbergOptions::default()).unwrap();
        assert!(r.x[0] > 0.5 && r.x[0] < 0.52, "{:?}", r.x);
    }
}
