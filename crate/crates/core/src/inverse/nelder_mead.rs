use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    /// Stop when the spread of simplex values falls below this.
    pub f_tol: f64,
    /// Stop when every vertex lies within this distance of the best one.
    pub x_tol: f64,
    /// Number of restarts from the best point with a fresh simplex.
    pub restarts: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { max_evals: 4000, f_tol: 1e-12, x_tol: 1e-6, restarts: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    /// Best value after each iteration.
    pub history: Vec<f64>,
    pub evaluations: usize,
    pub iterations: usize,
    /// Spread of the values on the first simplex.
    pub initial_spread: f64,
}

/// Nelder-Mead with dimension-adaptive coefficients; `steps[i]` sizes the initial simplex.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], steps: &[f64], opts: &NelderMeadOptions) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() { f64::INFINITY } else { v }
    };
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut best_x = x0.to_vec();
    let mut best_f = eval(x0, &mut evals);
    let mut initial_spread = f64::NAN;
    if n == 0 || best_f == 0.0 {
        return NelderMeadResult { x: best_x, f: best_f, history, evaluations: evals, iterations, initial_spread: 0.0 };
    }
    for round in 0..=opts.restarts {
        let scale = if round == 0 { 1.0 } else { 0.25f64.powi(round as i32) };
        let mut simplex: Vec<(Vec<f64>, f64)> = vec![(best_x.clone(), best_f)];
        for i in 0..n {
            let mut x = best_x.clone();
            x[i] += steps[i] * scale;
            let v = eval(&x, &mut evals);
            simplex.push((x, v));
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if initial_spread.is_nan() {
            initial_spread = simplex[n].1 - simplex[0].1;
        }
        while evals < opts.max_evals {
            iterations += 1;
            let spread = simplex[n].1 - simplex[0].1;
            let size = simplex[1..]
                .iter()
                .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            if spread <= opts.f_tol * (1.0 + simplex[0].1.abs()) || size <= opts.x_tol || simplex[0].1 == 0.0 {
                break;
            }
            let mut centroid = vec![0.0; n];
            for (x, _) in &simplex[..n] {
                for (c, v) in centroid.iter_mut().zip(x) {
                    *c += v / nf;
                }
            }
            let along = |t: f64| -> Vec<f64> {
                centroid.iter().zip(&simplex[n].0).map(|(c, w)| c + t * (c - w)).collect()
            };
            let xr = along(alpha);
            let fr = eval(&xr, &mut evals);
            if fr < simplex[0].1 {
                let xe = along(beta);
                let fe = eval(&xe, &mut evals);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                let (xc, fc) = if fr < simplex[n].1 {
                    let x = along(gamma);
                    let v = eval(&x, &mut evals);
                    (x, v)
                } else {
                    let x = along(-gamma);
                    let v = eval(&x, &mut evals);
                    (x, v)
                };
                if fc < simplex[n].1.min(fr) {
                    simplex[n] = (xc, fc);
                } else {
                    let x0 = simplex[0].0.clone();
                    for (x, v) in simplex[1..].iter_mut() {
                        for (xi, bi) in x.iter_mut().zip(&x0) {
                            *xi = bi + delta * (*xi - bi);
                        }
                        *v = eval(x, &mut evals);
                    }
                }
            }
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            history.push(simplex[0].1);
        }
        let improved = simplex[0].1 < best_f;
        if simplex[0].1 <= best_f {
            best_x = simplex[0].0.clone();
            best_f = simplex[0].1;
        }
        if evals >= opts.max_evals || best_f == 0.0 || (round > 0 && !improved) {
            break;
        }
    }
    NelderMeadResult { x: best_x, f: best_f, history, evaluations: evals, iterations, initial_spread }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock_and_fixed_point() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = nelder_mead(rosen, &[-1.2, 1.0], &[0.5, 0.5], &NelderMeadOptions { x_tol: 1e-10, f_tol: 0.0, ..Default::default() });
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6, "{r:?}");
        let zero = nelder_mead(|x| x[0] * x[0], &[0.0], &[1.0], &NelderMeadOptions::default());
        assert_eq!(zero.evaluations, 1);
    }
}
