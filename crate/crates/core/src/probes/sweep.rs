use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::integrals::{corner_integral, leading_term, lid_norms, weighted_corner_integral, IntegralMethod};
use super::CgoProbe;
use crate::fit::{exp_rate_fit, power_law_fit, LinearFit};
use crate::quadrature::QuadOptions;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "type")]
pub enum Quantity {
    /// `|int u0|` against `Gamma(n) |S| tau^-n`; power-law fit.
    CornerIntegral { method: IntegralMethod },
    /// `|int |x|^alpha u0|` against `Gamma(alpha + n) |S| tau^-(alpha + n)`; power-law fit.
    Weighted { alpha: f64 },
    /// H1 lid norm against its bound; exponential-rate fit.
    LidH1,
    /// Normal-derivative lid norm against its bound; exponential-rate fit.
    LidDnu,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepRow {
    pub tau: f64,
    pub value: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TauSweep {
    pub quantity: Quantity,
    pub rows: Vec<SweepRow>,
    /// Slope of `ln value` against `ln tau` (integrals) or against `tau` (lid norms).
    pub fit: LinearFit,
}

impl TauSweep {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("tau,quantity,bound,ratio\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{}", r.tau, r.value, r.bound, r.ratio);
        }
        s
    }

    /// Rows in the upper half of the grid.
    pub fn top_half(&self) -> &[SweepRow] {
        &self.rows[self.rows.len() / 2..]
    }
}

pub fn tau_sweep(probe: &CgoProbe, taus: &[f64], quantity: Quantity, opts: QuadOptions) -> Result<TauSweep> {
    if taus.len() < 5 {
        return Err(Error::DegenerateFit(format!("tau sweep needs at least 5 points, got {}", taus.len())));
    }
    let rows = taus
        .par_iter()
        .map(|&tau| {
            let p = probe.at_tau(tau);
            let (value, bound) = match quantity {
                Quantity::CornerIntegral { method } => {
                    (corner_integral(&p, method, opts)?.norm(), leading_term(&p.corner, tau, 0.0)?)
                }
                Quantity::Weighted { alpha } => {
                    (weighted_corner_integral(&p, alpha, opts)?.norm(), leading_term(&p.corner, tau, alpha)?)
                }
                Quantity::LidH1 => {
                    let n = lid_norms(&p, opts)?;
                    (n.h1, n.h1_bound)
                }
                Quantity::LidDnu => {
                    let n = lid_norms(&p, opts)?;
                    (n.dnu, n.dnu_bound)
                }
            };
            Ok(SweepRow { tau, value, bound, ratio: value / bound })
        })
        .collect::<Result<Vec<_>>>()?;
    let t: Vec<f64> = rows.iter().map(|r| r.tau).collect();
    let v: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let fit = match quantity {
        Quantity::CornerIntegral { .. } | Quantity::Weighted { .. } => power_law_fit(&t, &v)?,
        Quantity::LidH1 | Quantity::LidDnu => exp_rate_fit(&t, &v)?,
    };
    Ok(TauSweep { quantity, rows, fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::log_space;
    use crate::geometry::{TruncatedCorner, Vec2};
    use std::f64::consts::PI;

    #[test]
    fn sector_sweep_slope_and_short_grid() {
        let c = TruncatedCorner::sector(Vec2::new(0.0, 0.0), Vec2::new(0.0, 1.0), PI / 4.0, 1.0).unwrap();
        let p = CgoProbe::new(c, 1.0).unwrap();
        let q = Quantity::CornerIntegral { method: IntegralMethod::ClosedForm2D };
        let s = tau_sweep(&p, &log_space(20.0, 200.0, 10), q, QuadOptions::rel(1e-10)).unwrap();
        assert!((s.fit.slope + 2.0).abs() < 0.05);
        assert!(s.to_csv().lines().count() == 11);
        assert!(tau_sweep(&p, &[1.0, 2.0], q, QuadOptions::default()).is_err());
    }
}
