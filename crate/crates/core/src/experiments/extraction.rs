use serde::{Deserialize, Serialize};

use super::{config_error, Artifact, Check, Experiment, ExperimentConfig, LogGrid, Outcome};
use crate::geometry::{TruncatedCorner, Vec3};
use crate::indicator::{
    extract_two_content_gap, green_identity_residual, ExtractOptions, FieldDiff, FlankPolicy, PlaneWave, RadialBump,
};
use crate::probes::CgoProbe;
use crate::quadrature::QuadOptions;
use crate::{Result, C64};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct Wave {
    #[serde(with = "crate::serde_cx")]
    amplitude: C64,
    wavenumber: f64,
    direction: Vec3,
}

/// Perturbation `w` with `Delta w = c + kappa r^alpha` about the apex.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct Bump {
    #[serde(with = "crate::serde_cx")]
    c: C64,
    #[serde(with = "crate::serde_cx")]
    kappa: C64,
    alpha: f64,
}

fn default_quad_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "type", deny_unknown_fields)]
enum Mode {
    /// Extrapolated limit of the indicator against the constructed gap `-c`.
    #[serde(rename_all = "camelCase")]
    Extraction { taus: LogGrid, limit_rel_tol: f64, order_tol: f64 },
    /// Both sides of the Green identity at fixed `tau`.
    #[serde(rename_all = "camelCase")]
    Green {
        taus: Vec<f64>,
        tol: f64,
        #[serde(default = "default_quad_tol")]
        quad_tol: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct Params {
    corner: TruncatedCorner,
    background: Wave,
    bump: Bump,
    mode: Mode,
}

impl Params {
    fn check(&self) -> Result<()> {
        if !(self.bump.alpha > 0.0) {
            return Err(config_error("bump exponent alpha must be positive"));
        }
        if !(self.background.wavenumber.is_finite() && self.background.direction.norm() > 0.0) {
            return Err(config_error("background wave needs a finite wavenumber and a nonzero direction"));
        }
        match &self.mode {
            Mode::Extraction { taus, limit_rel_tol, order_tol } => {
                taus.check("tau", 4)?;
                if self.bump.c.norm() == 0.0 {
                    return Err(config_error("a zero apex gap has no relative error"));
                }
                if !(*limit_rel_tol > 0.0 && *order_tol > 0.0) {
                    return Err(config_error("tolerances must be positive"));
                }
            }
            Mode::Green { taus, tol, quad_tol } => {
                if taus.is_empty() || taus.iter().any(|t| !(*t > 0.0)) {
                    return Err(config_error("green mode needs positive tau values"));
                }
                if !(*tol > 0.0 && *quad_tol > 0.0) {
                    return Err(config_error("tolerances must be positive"));
                }
            }
        }
        Ok(())
    }
}

/// Corner-indicator extraction on a manufactured pair `u = v + w` with a known apex gap.
pub struct Extraction;

impl Experiment for Extraction {
    fn kind(&self) -> &'static str {
        "extraction"
    }

    fn describe(&self) -> &'static str {
        "apex-gap extraction and Green-identity residuals on manufactured fields"
    }

    fn validate(&self, cfg: &ExperimentConfig) -> Result<()> {
        cfg.params::<Params>()?.check()
    }

    fn run(&self, cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
        let p: Params = cfg.params()?;
        let c = &p.corner;
        let v = PlaneWave { amplitude: p.background.amplitude, k: p.background.wavenumber, dir: p.background.direction };
        let w = RadialBump { apex: c.apex, dim: c.dimension(), c: p.bump.c, kappa: p.bump.kappa, alpha: p.bump.alpha };
        let u = FieldDiff::sum(&v, &w);
        match p.mode {
            Mode::Extraction { taus, limit_rel_tol, order_tol } => {
                let probe = CgoProbe::new(c.clone(), taus.min)?;
                let opts = ExtractOptions { policy: FlankPolicy::IncludeFlanks, ..Default::default() };
                let r = extract_two_content_gap(&probe, &u, &v, &taus.values(), &opts)?;
                let expected = -p.bump.c;
                let rel = (r.limit - expected).norm() / expected.norm();
                out.note("limit", [r.limit.re, r.limit.im]);
                out.note("expected_limit", [expected.re, expected.im]);
                out.note("error_order", r.error_order);
                out.checks.push(Check::below("limit relative error", rel, limit_rel_tol));
                out.checks.push(Check::within("remainder order", r.error_order, p.bump.alpha, order_tol));
                out.artifacts.push(Artifact::csv("extraction", r.to_csv()));
                out.artifacts.push(Artifact::json("extraction", &r)?);
            }
            Mode::Green { taus, tol, quad_tol } => {
                let f = |x: Vec3| Ok(w.laplacian(x));
                let mut csv = String::from("tau,re_volume,im_volume,re_boundary,im_boundary,relative\n");
                for tau in taus {
                    let probe = CgoProbe::new(c.clone(), tau)?;
                    let g = green_identity_residual(&probe, &u, &v, &f, QuadOptions::rel(quad_tol))?;
                    csv.push_str(&format!(
                        "{tau},{},{},{},{},{}\n",
                        g.volume.re, g.volume.im, g.boundary.re, g.boundary.im, g.relative
                    ));
                    out.checks.push(Check::below(&format!("green residual at tau {tau}"), g.relative, tol));
                }
                out.artifacts.push(Artifact::csv("green", csv));
            }
        }
        Ok(())
    }
}
