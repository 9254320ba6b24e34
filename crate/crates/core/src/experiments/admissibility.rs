use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::forward::Geometry;
use super::{config_error, Artifact, Check, Experiment, ExperimentConfig, Outcome};
use crate::admissibility::{
    check_assumption, leading_order_ratios, nest_small_data_expansion, small_data_expansion, AdmissibilityOptions,
    AdmissibilityReport, Assumption, ExpansionConfig,
};
use crate::forward::{BoundaryData, ContentModel, FemSpace, SolverOptions};
use crate::Result;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "type", deny_unknown_fields)]
enum Mode {
    /// One assumption for a fixed configuration and measurement family.
    #[serde(rename_all = "camelCase")]
    Check {
        geometry: Geometry,
        content: ContentModel,
        assumption: Assumption,
        /// One family shared by every layer, or one per layer.
        families: Vec<Vec<BoundaryData>>,
        #[serde(default)]
        options: AdmissibilityOptions,
    },
    /// `||u - psi|| = o(eps)` for scaled data and contents.
    #[serde(rename_all = "camelCase")]
    Expansion {
        config: ExpansionConfig,
        eps: Vec<f64>,
        #[serde(default)]
        solver: SolverOptions,
    },
    /// Ratios of the admissibility quantities to their small-data leading terms.
    #[serde(rename_all = "camelCase")]
    LeadingOrder {
        config: ExpansionConfig,
        eps: Vec<f64>,
        amplitudes: Vec<Vec<f64>>,
        bounds: [f64; 2],
        #[serde(default)]
        options: AdmissibilityOptions,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct Params {
    mode: Mode,
}

fn check_eps(eps: &[f64]) -> Result<()> {
    if eps.len() < 2 || eps.iter().any(|e| !(*e > 0.0)) || eps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(config_error("eps grids need two or more positive, strictly decreasing values"));
    }
    Ok(())
}

impl Params {
    fn check(&self) -> Result<()> {
        match &self.mode {
            Mode::Check { geometry, content, families, .. } => {
                geometry.check()?;
                content.validate()?;
                if geometry.interfaces.is_empty() || geometry.interfaces.len() != content.layers.len() {
                    return Err(config_error("one content layer per interface, and at least one interface"));
                }
                if families.is_empty() || families.iter().any(Vec::is_empty) {
                    return Err(config_error("every measurement family needs at least one datum"));
                }
            }
            Mode::Expansion { config, eps, .. } => {
                config.validate()?;
                check_eps(eps)?;
            }
            Mode::LeadingOrder { config, eps, amplitudes, bounds, .. } => {
                config.validate()?;
                check_eps(eps)?;
                if amplitudes.is_empty() || amplitudes.iter().any(Vec::is_empty) {
                    return Err(config_error("every amplitude family needs at least one entry"));
                }
                if !(bounds[0] > 0.0 && bounds[1] > bounds[0]) {
                    return Err(config_error("ratio bounds must satisfy 0 < lo < hi"));
                }
            }
        }
        Ok(())
    }
}

fn quantities_csv(r: &AdmissibilityReport) -> String {
    let mut s = String::from("quantity,layer,vertex,x,y,re_value,im_value,leading,tolerance,pass\n");
    for q in &r.quantities {
        let _ = writeln!(
            s,
            "{:?},{},{},{},{},{},{},{},{},{}",
            q.quantity, q.layer, q.vertex, q.point.x, q.point.y, q.value.re, q.value.im, q.leading.norm(), q.tolerance, q.pass
        );
    }
    s
}

/// Admissibility checks and small-data expansions.
pub struct Admissibility;

impl Experiment for Admissibility {
    fn kind(&self) -> &'static str {
        "admissibility"
    }

    fn describe(&self) -> &'static str {
        "Assumptions A-D at the vertices and small-data expansions of nests"
    }

    fn validate(&self, cfg: &ExperimentConfig) -> Result<()> {
        cfg.params::<Params>()?.check()
    }

    fn run(&self, cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
        let p: Params = cfg.params()?;
        match p.mode {
            Mode::Check { geometry, content, assumption, families, options } => {
                let space = FemSpace::new(geometry.mesh()?);
                let r = check_assumption(assumption, &space, &content, &families, &options)?;
                out.note("worst_margin", r.worst_margin);
                out.note("satisfied_by", r.satisfied_by);
                out.checks.push(Check::flag(&format!("Assumption {assumption:?} holds"), r.pass));
                out.artifacts.push(Artifact::csv("quantities", quantities_csv(&r)));
                out.artifacts.push(Artifact::json("report", &r)?);
            }
            Mode::Expansion { config, eps, solver } => {
                let t = if config.interfaces.len() > 1 {
                    nest_small_data_expansion(&config, &eps, &solver)?
                } else {
                    small_data_expansion(&config, &eps, &solver)?
                };
                out.note("slope", t.fit.slope);
                out.checks.push(Check::flag("||v|| / eps strictly decreasing", t.strictly_decreasing));
                out.checks.push(Check::above("log-log slope of ||v||", t.fit.slope, config.min_slope));
                out.artifacts.push(Artifact::csv("expansion", t.to_csv()));
            }
            Mode::LeadingOrder { config, eps, amplitudes, bounds, options } => {
                let t = leading_order_ratios(&config, &eps, &amplitudes, bounds, &options)?;
                let last = t.rows.last().ok_or_else(|| config_error("empty eps grid"))?;
                out.note("assumption", t.assumption);
                out.note("smallest_eps", last.eps);
                out.checks.push(Check::range("smallest leading-order ratio", last.min_ratio, bounds));
                out.checks.push(Check::range("largest leading-order ratio", last.max_ratio, bounds));
                out.checks.push(Check::flag(&format!("Assumption {:?} holds at the smallest eps", t.assumption), last.report.pass));
                out.artifacts.push(Artifact::csv("leading_order", t.to_csv()));
                out.artifacts.push(Artifact::csv("quantities", quantities_csv(&last.report)));
            }
        }
        Ok(())
    }
}
