use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::simulator::Simulator;
use crate::forward::{ContentModel, FemSpace};
use crate::geometry::ConvexPolygon;
use crate::linalg::{cond1, solve_dense, DenseMatrix};
use crate::{Error, Result, C64};

/// Coefficient of `u^power` in region `region` (0 is the background, where only power 1 exists).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Slot {
    pub region: usize,
    pub power: usize,
}

impl Slot {
    pub fn get(&self, c: &ContentModel) -> Result<C64> {
        self.check(c)?;
        Ok(if self.region == 0 { c.background } else { c.layers[self.region - 1][self.power - 1] })
    }

    pub fn set(&self, c: &mut ContentModel, value: C64) -> Result<()> {
        self.check(c)?;
        if self.region == 0 {
            c.background = value;
        } else {
            c.layers[self.region - 1][self.power - 1] = value;
        }
        Ok(())
    }

    fn check(&self, c: &ContentModel) -> Result<()> {
        let ok = match self.region {
            0 => self.power == 1,
            r => r <= c.layers.len() && self.power >= 1 && self.power <= c.layers[r - 1].len(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("no coefficient u^{} in region {}", self.power, self.region)))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct GaussNewtonOptions {
    pub max_iter: usize,
    /// Stop when the relative step falls below this.
    pub step_tol: f64,
    /// Relative finite-difference increment.
    pub fd_step: f64,
    /// Initial Levenberg-Marquardt damping relative to the Gram diagonal.
    pub damping: f64,
    /// Gram matrices conditioned worse than this are reported as rank deficient.
    pub max_condition: f64,
}

impl Default for GaussNewtonOptions {
    fn default() -> Self {
        Self { max_iter: 30, step_tol: 1e-9, fd_step: 1e-6, damping: 1e-6, max_condition: 1e12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CoefficientFit {
    pub content: ContentModel,
    pub slots: Vec<Slot>,
    #[serde(with = "crate::serde_cx::vec")]
    pub values: Vec<C64>,
    pub misfit: f64,
    /// Lumped residual norm squared after each accepted step.
    pub history: Vec<f64>,
    pub iterations: usize,
    /// 1-norm condition number of `J^H J` at the solution.
    pub condition: f64,
    /// Set when the Gram matrix is numerically singular or when fewer distinct
    /// measurements than unknowns per region are available.
    pub rank_deficient: bool,
}

fn with_values(base: &ContentModel, slots: &[Slot], x: &[C64]) -> Result<ContentModel> {
    let mut c = base.clone();
    for (s, v) in slots.iter().zip(x) {
        s.set(&mut c, *v)?;
    }
    Ok(c)
}

fn norm_sq(r: &[C64]) -> f64 {
    r.iter().map(|z| z.norm_sqr()).sum()
}

/// Distinct Dirichlet data among the measurements.
fn distinct_measurements(sim: &Simulator) -> usize {
    let mut seen: Vec<&crate::forward::BoundaryData> = Vec::new();
    for m in &sim.measurements {
        if !seen.contains(&&m.psi) {
            seen.push(&m.psi);
        }
    }
    seen.len()
}

/// Levenberg-Marquardt on the lumped flux residual over the complex coefficients in `slots`,
/// with the geometry held fixed. The residual is holomorphic in the coefficients, so a real
/// increment gives the complex derivative.
pub fn fit_coefficients(
    sim: &mut Simulator,
    interfaces: &[ConvexPolygon],
    initial: &ContentModel,
    slots: &[Slot],
    opts: &GaussNewtonOptions,
) -> Result<CoefficientFit> {
    if slots.is_empty() {
        return Err(Error::Config("no free coefficients".into()));
    }
    let space = FemSpace::new(sim.mesh_for(interfaces)?);
    let sim = &*sim;
    let residual = |x: &[C64]| -> Result<Vec<C64>> {
        let c = with_values(initial, slots, x)?;
        sim.residuals(&sim.simulate_on(&space, &c)?)
    };
    let mut x: Vec<C64> = slots.iter().map(|s| s.get(initial)).collect::<Result<_>>()?;
    let mut r = residual(&x)?;
    let mut cost = norm_sq(&r);
    let mut history = vec![cost];
    let mut mu = opts.damping;
    let mut iterations = 0;
    let mut condition = f64::NAN;
    let n = slots.len();
    while iterations < opts.max_iter && cost > 0.0 {
        iterations += 1;
        let cols = (0..n)
            .into_par_iter()
            .map(|k| {
                let h = opts.fd_step * x[k].norm().max(1.0);
                let mut xp = x.clone();
                xp[k] += h;
                let rp = residual(&xp)?;
                Ok(rp.iter().zip(&r).map(|(a, b)| (a - b) / h).collect::<Vec<C64>>())
            })
            .collect::<Result<Vec<_>>>()?;
        let mut j = DenseMatrix::zeros(r.len(), n);
        for (k, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                j[(i, k)] = *v;
            }
        }
        let neg: Vec<C64> = r.iter().map(|z| -z).collect();
        let (gram, rhs) = j.normal_equations(&neg);
        condition = cond1(&gram);
        let mut accepted = false;
        let mut step_norm = 0.0;
        for _ in 0..12 {
            let mut a = gram.clone();
            for i in 0..n {
                let d = gram[(i, i)].re;
                a[(i, i)] += mu * d.max(f64::MIN_POSITIVE);
            }
            let dx = solve_dense(&a, &rhs)?;
            let xn: Vec<C64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
            let trial = residual(&xn).and_then(|rn| Ok((norm_sq(&rn), rn)));
            if let Ok((cn, rn)) = trial {
                if cn <= cost {
                    step_norm = dx.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
                        / x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1e-300);
                    x = xn;
                    r = rn;
                    cost = cn;
                    mu = (mu / 3.0).max(1e-12);
                    accepted = true;
                    break;
                }
            }
            mu *= 4.0;
        }
        history.push(cost);
        if !accepted || step_norm < opts.step_tol {
            break;
        }
    }
    if !cost.is_finite() {
        return Err(Error::GaussNewton(format!("non-finite residual after {iterations} iterations")));
    }
    let content = with_values(initial, slots, &x)?;
    let misfit = sim.misfit_of(&sim.simulate_on(&space, &content)?)?;
    let mut per_region = std::collections::HashMap::new();
    for s in slots {
        *per_region.entry(s.region).or_insert(0usize) += 1;
    }
    let needed = per_region.values().copied().max().unwrap_or(0);
    let rank_deficient = !(condition <= opts.max_condition) || distinct_measurements(sim) < needed;
    Ok(CoefficientFit {
        content,
        slots: slots.to_vec(),
        values: x,
        misfit,
        history,
        iterations,
        condition,
        rank_deficient,
    })
}
