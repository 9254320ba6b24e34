use serde::{Deserialize, Serialize};

use super::{config_error, Artifact, Check, Experiment, ExperimentConfig, LogGrid, Outcome};
use crate::geometry::{CornerKind, TruncatedCorner};
use crate::probes::{corner_integral, tau_sweep, CgoProbe, IntegralMethod, Quantity};
use crate::quadrature::QuadOptions;
use crate::Result;

fn default_rate_tol() -> f64 {
    0.05
}

fn default_bound_factor() -> f64 {
    1.0
}

fn default_rel_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct Params {
    corner: TruncatedCorner,
    taus: LogGrid,
    quantities: Vec<Quantity>,
    /// Allowed deviation of power-law slopes from `-(alpha + n)`.
    slope_tol: f64,
    /// Allowed relative deviation of lid decay rates from `zeta h`.
    #[serde(default = "default_rate_tol")]
    rate_tol: f64,
    /// Lid norms must stay below this multiple of their bounds.
    #[serde(default = "default_bound_factor")]
    bound_factor: f64,
    /// Range for `value / leading term` over the upper half of the grid.
    #[serde(default)]
    leading_ratio: Option<[f64; 2]>,
    /// Relative agreement of the planar closed form with quadrature.
    #[serde(default)]
    closed_form_tol: Option<f64>,
    #[serde(default = "default_rel_tol")]
    rel_tol: f64,
}

impl Params {
    fn check(&self) -> Result<()> {
        self.taus.check("tau", 5)?;
        if self.quantities.is_empty() {
            return Err(config_error("at least one swept quantity is required"));
        }
        if self.closed_form_tol.is_some() && self.corner.kind != CornerKind::Sector {
            return Err(config_error("the closed form exists for planar sectors only"));
        }
        for q in &self.quantities {
            match q {
                Quantity::CornerIntegral { method: IntegralMethod::ClosedForm2D } if self.corner.dimension() != 2 => {
                    return Err(config_error("closed-form corner integral needs a planar sector"));
                }
                Quantity::Weighted { alpha } if !(*alpha >= 0.0) => {
                    return Err(config_error(format!("weight exponent must be non-negative, got {alpha}")));
                }
                _ => {}
            }
        }
        if !(self.slope_tol > 0.0 && self.rate_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(config_error("tolerances must be positive"));
        }
        Ok(())
    }
}

fn label(q: &Quantity) -> String {
    match q {
        Quantity::CornerIntegral { .. } => "corner".into(),
        Quantity::Weighted { alpha } => format!("weighted_{alpha}"),
        Quantity::LidH1 => "lid_h1".into(),
        Quantity::LidDnu => "lid_dnu".into(),
    }
}

/// Power-law and lid-decay sweeps of the CGO probe over a truncated corner.
pub struct Lemma21;

impl Experiment for Lemma21 {
    fn kind(&self) -> &'static str {
        "lemma21"
    }

    fn describe(&self) -> &'static str {
        "tau sweeps of corner integrals, weighted integrals and lid norms"
    }

    fn validate(&self, cfg: &ExperimentConfig) -> Result<()> {
        cfg.params::<Params>()?.check()
    }

    fn run(&self, cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
        let p: Params = cfg.params()?;
        let probe = CgoProbe::new(p.corner.clone(), p.taus.min)?;
        let taus = p.taus.values();
        let opts = QuadOptions::rel(p.rel_tol);
        let n = p.corner.dimension() as f64;
        for q in &p.quantities {
            let sweep = tau_sweep(&probe, &taus, *q, opts)?;
            let name = label(q);
            out.note(&format!("{name}_slope"), sweep.fit.slope);
            match q {
                Quantity::CornerIntegral { .. } | Quantity::Weighted { .. } => {
                    let alpha = if let Quantity::Weighted { alpha } = q { *alpha } else { 0.0 };
                    out.checks.push(Check::within(&format!("{name} slope"), sweep.fit.slope, -(alpha + n), p.slope_tol));
                    if let Some(range) = p.leading_ratio {
                        for r in sweep.top_half() {
                            out.checks.push(Check::range(&format!("{name} ratio at tau {:.2}", r.tau), r.ratio, range));
                        }
                    }
                }
                Quantity::LidH1 | Quantity::LidDnu => {
                    let rate = probe.direction.zeta * p.corner.radius;
                    out.checks.push(Check::below(
                        &format!("{name} decay-rate relative error"),
                        (-sweep.fit.slope / rate - 1.0).abs(),
                        p.rate_tol,
                    ));
                    let worst = sweep.rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
                    out.checks.push(Check::below(&format!("{name} norm over bound"), worst, p.bound_factor));
                }
            }
            out.artifacts.push(Artifact::csv(&format!("sweep_{name}"), sweep.to_csv()));
        }
        if let Some(tol) = p.closed_form_tol {
            let mut worst: f64 = 0.0;
            for &tau in &taus {
                let pr = probe.at_tau(tau);
                let cf = corner_integral(&pr, IntegralMethod::ClosedForm2D, opts)?;
                let q = corner_integral(&pr, IntegralMethod::Quadrature, QuadOptions::rel(p.rel_tol * 0.1))?;
                worst = worst.max(((cf - q) / q).norm());
            }
            out.note("closed_form_deviation", worst);
            out.checks.push(Check::below("closed form against quadrature", worst, tol));
        }
        out.note("zeta", probe.direction.zeta);
        Ok(())
    }
}
