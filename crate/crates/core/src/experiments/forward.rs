use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{config_error, Artifact, Check, Experiment, ExperimentConfig, Outcome};
use crate::forward::{
    dirichlet_to_neumann, small_data_bound, solve_semilinear, BoundaryData, CauchyData, ContentModel, FemSpace,
    SolverOptions,
};
use crate::geometry::{ConvexPolygon, Vec2};
use crate::mesh::{triangulate, TriMesh};
use crate::{Result, C64};

/// Outer domain, interfaces and mesh size; replaced by `meshFile` when one is given.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub(super) struct Geometry {
    pub outer: ConvexPolygon,
    pub interfaces: Vec<ConvexPolygon>,
    pub h: f64,
}

impl Geometry {
    pub fn check(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h < self.outer.diameter()) {
            return Err(config_error(format!("mesh size {} must be positive and below the domain diameter", self.h)));
        }
        Ok(())
    }

    pub fn mesh(&self) -> Result<TriMesh> {
        triangulate(&self.outer, &self.interfaces, self.h)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "type", deny_unknown_fields)]
enum Mode {
    /// One Newton solve with boundary data `psi`.
    Solve { psi: BoundaryData },
    /// Solves with data `eps psi` over a grid of `eps`; the ratio `||u|| / ||eps psi||` must stay bounded.
    #[serde(rename_all = "camelCase")]
    SmallData { psi: BoundaryData, eps: Vec<f64>, max_spread: f64, max_iterations: usize },
    /// `u* = amplitude sin(pi x) sin(pi y)` with the matching source, over `refinements` uniform refinements.
    #[serde(rename_all = "camelCase")]
    Manufactured { amplitude: f64, refinements: usize, expected_rate: f64, rate_tol: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct Params {
    #[serde(default)]
    geometry: Option<Geometry>,
    content: ContentModel,
    #[serde(default)]
    solver: SolverOptions,
    mode: Mode,
}

impl Params {
    fn check(&self, cfg: &ExperimentConfig) -> Result<()> {
        match (&self.geometry, &cfg.mesh_file) {
            (Some(g), None) => {
                g.check()?;
                if g.interfaces.len() != self.content.layers.len() {
                    return Err(config_error(format!(
                        "{} interfaces but {} content layers",
                        g.interfaces.len(),
                        self.content.layers.len()
                    )));
                }
            }
            (None, Some(_)) => {}
            _ => return Err(config_error("give exactly one of `params.geometry` and `meshFile`")),
        }
        self.content.validate()?;
        match &self.mode {
            Mode::Solve { .. } => {}
            Mode::SmallData { eps, max_spread, .. } => {
                if eps.len() < 2 || eps.iter().any(|e| !(*e > 0.0)) || !(*max_spread > 1.0) {
                    return Err(config_error("small-data mode needs two or more positive eps and a spread above 1"));
                }
            }
            Mode::Manufactured { refinements, rate_tol, .. } => {
                if *refinements < 1 || !(*rate_tol > 0.0) {
                    return Err(config_error("manufactured mode needs at least one refinement and a positive tolerance"));
                }
                if cfg.mesh_file.is_some() {
                    return Err(config_error("manufactured mode triangulates its own meshes"));
                }
            }
        }
        Ok(())
    }

    fn mesh(&self, cfg: &ExperimentConfig) -> Result<TriMesh> {
        match (&self.geometry, &cfg.mesh_file) {
            (_, Some(path)) => {
                let mesh = TriMesh::read(path)?;
                if mesh.interfaces.len() != self.content.layers.len() {
                    return Err(config_error(format!(
                        "mesh file has {} interfaces but the content has {} layers",
                        mesh.interfaces.len(),
                        self.content.layers.len()
                    )));
                }
                Ok(mesh)
            }
            (Some(g), None) => g.mesh(),
            (None, None) => Err(config_error("no geometry")),
        }
    }
}

pub(super) fn cauchy_csv(d: &CauchyData) -> String {
    let mut s = String::from("x,y,side,re_psi,im_psi,re_dnu,im_dnu\n");
    for i in 0..d.len() {
        let p = d.points[i];
        let _ = writeln!(s, "{},{},{},{},{},{},{}", p.x, p.y, d.side[i], d.psi[i].re, d.psi[i].im, d.dnu[i].re, d.dnu[i].im);
    }
    s
}

/// Forward semilinear solves: single runs, small-data scaling and manufactured convergence.
pub struct Forward;

impl Experiment for Forward {
    fn kind(&self) -> &'static str {
        "forward"
    }

    fn describe(&self) -> &'static str {
        "Newton solves of the semilinear inclusion problem"
    }

    fn validate(&self, cfg: &ExperimentConfig) -> Result<()> {
        cfg.params::<Params>()?.check(cfg)
    }

    fn run(&self, cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
        let p: Params = cfg.params()?;
        match &p.mode {
            Mode::Solve { psi } => {
                let space = FemSpace::new(p.mesh(cfg)?);
                let sol = solve_semilinear(&space, &p.content, &|x| psi.eval(x), None, &p.solver)?;
                let data = dirichlet_to_neumann(&sol.field, &p.content, None)?;
                let max = sol.field.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
                out.note("nodes", space.n());
                out.note("newton_iterations", sol.iterations);
                out.note("max_abs_u", max);
                out.note("zero_solution", max == 0.0);
                out.note("h1_norm", sol.field.h1_norm());
                let residual = sol.history.last().copied().unwrap_or(0.0);
                out.checks.push(Check::below("final relative residual", residual, p.solver.newton_tol));
                let mut csv = String::from("x,y,re_u,im_u\n");
                for (x, u) in space.mesh.nodes.iter().zip(&sol.field.values) {
                    let _ = writeln!(csv, "{},{},{},{}", x.x, x.y, u.re, u.im);
                }
                out.artifacts.push(Artifact::csv("solution", csv));
                out.artifacts.push(Artifact::csv("cauchy", cauchy_csv(&data)));
            }
            Mode::SmallData { psi, eps, max_spread, max_iterations } => {
                let space = FemSpace::new(p.mesh(cfg)?);
                let t = small_data_bound(&space, &p.content, psi, eps, &p.solver, *max_spread)?;
                let mut csv = String::from("eps,iterations,final_residual,u_norm,psi_norm,ratio\n");
                for r in &t.rows {
                    let _ = writeln!(csv, "{},{},{},{},{},{}", r.eps, r.iterations, r.final_residual, r.u_norm, r.psi_norm, r.ratio);
                    out.checks.push(Check::below(&format!("newton iterations at eps {:e}", r.eps), r.iterations as f64, *max_iterations as f64));
                    out.checks.push(Check::below(&format!("final residual at eps {:e}", r.eps), r.final_residual, p.solver.newton_tol));
                }
                out.checks.push(Check::below("ratio spread", t.spread, *max_spread));
                out.note("spread", t.spread);
                out.artifacts.push(Artifact::csv("small_data", csv));
            }
            Mode::Manufactured { amplitude, refinements, expected_rate, rate_tol } => {
                let g = p.geometry.as_ref().ok_or_else(|| config_error("manufactured mode needs `geometry`"))?;
                let a = *amplitude;
                let exact = move |x: Vec2| C64::new(a * (PI * x.x).sin() * (PI * x.y).sin(), 0.0);
                let interfaces = g.interfaces.clone();
                let content = p.content.clone();
                let source = move |x: Vec2| {
                    let u = exact(x);
                    u * (2.0 * PI * PI) - content.eval(TriMesh::classify(&interfaces, x), u)
                };
                let mut mesh = g.mesh()?;
                let mut csv = String::from("h,l2_error,rate\n");
                let mut errors: Vec<f64> = Vec::new();
                for level in 0..=*refinements {
                    if level > 0 {
                        mesh = mesh.refine();
                    }
                    let h = mesh.mesh_size;
                    let space = FemSpace::new(mesh.clone());
                    let sol = solve_semilinear(&space, &p.content, &exact, Some(&source), &p.solver)?;
                    let e = sol.field.l2_error(exact);
                    let rate = errors.last().map(|prev| (prev / e).log2());
                    let _ = writeln!(csv, "{h},{e},{}", rate.map_or(String::new(), |r| r.to_string()));
                    if let Some(r) = rate {
                        out.checks.push(Check::within(&format!("L2 rate at level {level}"), r, *expected_rate, *rate_tol));
                    }
                    errors.push(e);
                }
                out.note("l2_errors", &errors);
                out.artifacts.push(Artifact::csv("convergence", csv));
            }
        }
        Ok(())
    }
}
