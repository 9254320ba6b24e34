use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::gauss_newton::{fit_coefficients, GaussNewtonOptions, Slot};
use super::levenberg::{levenberg_marquardt, LevenbergOptions};
use super::nelder_mead::{nelder_mead, NelderMeadOptions};
use super::simulator::Simulator;
use crate::forward::ContentModel;
use crate::geometry::{ConvexPolygon, Vec2};
use crate::{Error, Result, C64};

/// Misfit floor assigned to infeasible candidates.
pub const PENALTY: f64 = 1e3;

/// How a free interface is parameterized during the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ShapeModel {
    /// All `2V` vertex coordinates, projected to convex position before every evaluation.
    #[default]
    Vertices,
    /// Translation, log-scale and rotation of the initial polygon about its centroid.
    Similarity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct ShapeOptions {
    pub model: ShapeModel,
    pub nelder_mead: NelderMeadOptions,
    /// Final misfits above this raise a stagnation error.
    pub misfit_tol: f64,
    /// Initial-simplex spread below this fraction of the initial misfit flags a flat landscape.
    pub flat_tol: f64,
    /// Refine free coefficients by Gauss-Newton once the shape search ends.
    pub refine_coefficients: bool,
    pub gauss_newton: GaussNewtonOptions,
}

impl Default for ShapeOptions {
    fn default() -> Self {
        Self {
            model: ShapeModel::Vertices,
            nelder_mead: NelderMeadOptions::default(),
            misfit_tol: 1e-2,
            flat_tol: 1e-2,
            refine_coefficients: true,
            gauss_newton: GaussNewtonOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ShapeRecovery {
    pub interfaces: Vec<ConvexPolygon>,
    pub content: ContentModel,
    pub initial_misfit: f64,
    pub misfit: f64,
    pub history: Vec<f64>,
    pub evaluations: usize,
    pub iterations: usize,
    pub remeshes: usize,
    pub flat_landscape: bool,
    pub seconds: f64,
}

/// Projects an ordered point set to a strictly convex polygon with the same vertex count.
///
/// Reflex and collinear points are dropped by the hull; the count is restored by inserting
/// slightly raised midpoints on the longest edges, and the result is rotated cyclically to
/// best match the input labelling.
pub fn convex_repair(points: &[Vec2]) -> Result<ConvexPolygon> {
    let n = points.len();
    let hull = ConvexPolygon::convex_hull(points)?;
    let mut v = hull.vertices().to_vec();
    while v.len() < n {
        let m = v.len();
        let k = (0..m).max_by(|&a, &b| v[a].dist(v[(a + 1) % m]).total_cmp(&v[b].dist(v[(b + 1) % m]))).unwrap_or(0);
        let (a, b) = (v[k], v[(k + 1) % m]);
        let e = b - a;
        // Outward normal of a counterclockwise edge.
        let out = Vec2::new(e.y, -e.x) * 1e-3;
        v.insert(k + 1, (a + b) * 0.5 + out);
    }
    let shift = (0..n)
        .min_by(|&s, &t| {
            let cost = |k: usize| (0..n).map(|i| v[(i + k) % n].dist(points[i]).powi(2)).sum::<f64>();
            cost(s).total_cmp(&cost(t))
        })
        .unwrap_or(0);
    ConvexPolygon::new((0..n).map(|i| v[(i + shift) % n]).collect())
}

/// Unknown vector layout: free polygons first, then the real parts of free coefficients.
struct Layout<'a> {
    interfaces: &'a [ConvexPolygon],
    free: Vec<usize>,
    model: ShapeModel,
    content: &'a ContentModel,
    slots: &'a [Slot],
}

impl Layout<'_> {
    fn polygon_dim(&self, p: &ConvexPolygon) -> usize {
        match self.model {
            ShapeModel::Vertices => 2 * p.len(),
            ShapeModel::Similarity => 4,
        }
    }

    fn encode(&self, h: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let (mut x, mut steps) = (Vec::new(), Vec::new());
        for &k in &self.free {
            let p = &self.interfaces[k];
            let step = (2.0 * h).max(0.05 * p.diameter());
            match self.model {
                ShapeModel::Vertices => {
                    x.extend(p.to_params());
                    steps.extend(std::iter::repeat(step).take(2 * p.len()));
                }
                ShapeModel::Similarity => {
                    let rel = step / (0.5 * p.diameter());
                    x.extend([0.0; 4]);
                    steps.extend([step, step, rel, rel]);
                }
            }
        }
        for s in self.slots {
            let v = s.get(self.content)?.re;
            x.push(v);
            steps.push(if v == 0.0 { 0.1 } else { 0.1 * v.abs() });
        }
        Ok((x, steps))
    }

    fn decode(&self, x: &[f64]) -> Result<(Vec<ConvexPolygon>, ContentModel)> {
        let mut interfaces = self.interfaces.to_vec();
        let mut at = 0;
        for &k in &self.free {
            let base = &self.interfaces[k];
            let d = self.polygon_dim(base);
            let p = &x[at..at + d];
            interfaces[k] = match self.model {
                ShapeModel::Vertices => convex_repair(&p.chunks(2).map(|c| Vec2::new(c[0], c[1])).collect::<Vec<_>>())?,
                ShapeModel::Similarity => {
                    let c = base.centroid();
                    base.rotated(c, p[3]).scaled(p[2].exp())?.translated(Vec2::new(p[0], p[1]))
                }
            };
            at += d;
        }
        let mut content = self.content.clone();
        for (s, &v) in self.slots.iter().zip(&x[at..]) {
            let im = s.get(self.content)?.im;
            s.set(&mut content, C64::new(v, im))?;
        }
        content.validate()?;
        Ok((interfaces, content))
    }
}

fn objective(sim: &mut Simulator, layout: &Layout, x: &[f64]) -> f64 {
    let Ok((interfaces, content)) = layout.decode(x) else {
        return 2.0 * PENALTY;
    };
    let deficit = sim.clearance_deficit(&interfaces);
    if deficit > 0.0 {
        return PENALTY * (1.0 + deficit);
    }
    sim.misfit(&interfaces, &content).unwrap_or(2.0 * PENALTY)
}

/// Nelder-Mead over the free interfaces `free` and the real parts of the coefficients in
/// `slots`, followed by an optional Gauss-Newton refinement of those coefficients.
/// Stagnation is not checked here.
pub fn search(
    sim: &mut Simulator,
    interfaces: &[ConvexPolygon],
    free: &[usize],
    content: &ContentModel,
    slots: &[Slot],
    opts: &ShapeOptions,
) -> Result<ShapeRecovery> {
    let start = Instant::now();
    let remeshes0 = sim.remeshes;
    if free.iter().any(|&k| k >= interfaces.len()) {
        return Err(Error::Config("free interface index out of range".into()));
    }
    let layout = Layout { interfaces, free: free.to_vec(), model: opts.model, content, slots };
    let (x0, steps) = layout.encode(sim.h)?;
    let r = nelder_mead(|x| objective(sim, &layout, x), &x0, &steps, &opts.nelder_mead);
    let (found, mut content) = layout.decode(&r.x)?;
    let mut misfit = r.f;
    let initial_misfit = r.history.first().map_or(r.f, |_| objective(sim, &layout, &x0));
    if opts.refine_coefficients && !slots.is_empty() && misfit < PENALTY {
        let fit = fit_coefficients(sim, &found, &content, slots, &opts.gauss_newton)?;
        if fit.misfit < misfit {
            misfit = fit.misfit;
            content = fit.content;
        }
    }
    let flat_landscape = r.initial_spread <= opts.flat_tol * initial_misfit.max(f64::MIN_POSITIVE) && initial_misfit > 0.0;
    Ok(ShapeRecovery {
        interfaces: found,
        content,
        initial_misfit,
        misfit,
        history: r.history,
        evaluations: r.evaluations,
        iterations: r.iterations,
        remeshes: sim.remeshes - remeshes0,
        flat_landscape,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Levenberg-Marquardt over the same unknowns as [`search`], on the misfit residual vector.
/// Suited to a start already inside the basin of the solution.
pub fn polish(
    sim: &mut Simulator,
    interfaces: &[ConvexPolygon],
    free: &[usize],
    content: &ContentModel,
    slots: &[Slot],
    opts: &ShapeOptions,
    lm: &LevenbergOptions,
) -> Result<ShapeRecovery> {
    let start = Instant::now();
    let remeshes0 = sim.remeshes;
    if free.iter().any(|&k| k >= interfaces.len()) {
        return Err(Error::Config("free interface index out of range".into()));
    }
    let layout = Layout { interfaces, free: free.to_vec(), model: opts.model, content, slots };
    let (x0, steps) = layout.encode(sim.h)?;
    let residual = |x: &[f64]| -> Option<Vec<f64>> {
        let (ifs, c) = layout.decode(x).ok()?;
        if sim.clearance_deficit(&ifs) > 0.0 {
            return None;
        }
        let r = sim.residuals_for(&ifs, &c).ok()?;
        Some(r.iter().flat_map(|z| [z.re, z.im]).collect())
    };
    let r = levenberg_marquardt(residual, &x0, &steps, lm)
        .ok_or_else(|| Error::Config("polish started from an infeasible configuration".into()))?;
    let (found, mut content) = layout.decode(&r.x)?;
    let mut misfit = sim.misfit(&found, &content)?;
    if opts.refine_coefficients && !slots.is_empty() {
        let fit = fit_coefficients(sim, &found, &content, slots, &opts.gauss_newton)?;
        if fit.misfit < misfit {
            misfit = fit.misfit;
            content = fit.content;
        }
    }
    Ok(ShapeRecovery {
        interfaces: found,
        content,
        initial_misfit: r.history[0],
        misfit,
        iterations: r.iterations,
        history: r.history,
        evaluations: r.evaluations,
        remeshes: sim.remeshes - remeshes0,
        flat_landscape: false,
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn stagnation(r: &ShapeRecovery, tol: f64) -> Error {
    let mut diagnostics = format!(
        "{} evaluations, {} iterations, initial misfit {:.3e}",
        r.evaluations, r.iterations, r.initial_misfit
    );
    if r.flat_landscape {
        diagnostics.push_str(", flat misfit landscape (check Assumption A at the vertices)");
    }
    Error::Stagnation { misfit: r.misfit, tolerance: tol, diagnostics }
}

/// Single convex inclusion from boundary data, with the coefficients in `slots` co-estimated.
pub fn recover_convex_polygon(
    sim: &mut Simulator,
    initial: &ConvexPolygon,
    content: &ContentModel,
    slots: &[Slot],
    opts: &ShapeOptions,
) -> Result<ShapeRecovery> {
    let r = search(sim, std::slice::from_ref(initial), &[0], content, slots, opts)?;
    if r.misfit > opts.misfit_tol {
        return Err(stagnation(&r, opts.misfit_tol));
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct NestOptions {
    pub stage: ShapeOptions,
    /// Joint Levenberg-Marquardt refinement of every layer once peeling is done.
    pub polish: bool,
    /// Mesh size of a second joint refinement, started from the first. Coarse-mesh
    /// discretization error can create spurious minima that a finer mesh removes.
    pub fine_polish: Option<f64>,
    pub levenberg: LevenbergOptions,
}

impl Default for NestOptions {
    fn default() -> Self {
        Self { stage: ShapeOptions::default(), polish: true, fine_polish: None, levenberg: LevenbergOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StageReport {
    pub layer: usize,
    pub misfit: f64,
    pub evaluations: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NestRecovery {
    pub layers: Vec<ConvexPolygon>,
    pub content: ContentModel,
    pub misfit: f64,
    pub stages: Vec<StageReport>,
    pub polish: Option<StageReport>,
    pub fine_polish: Option<StageReport>,
}

/// Layer-by-layer recovery from the outside in.
///
/// Stage `l` searches for interface `l` with the outer interfaces frozen at their recovered
/// positions and the inner ones held at their initial estimates, co-estimating the
/// coefficients of regions `0..=l`. A joint refinement of every layer follows. `initial`
/// seeds the interfaces, `content` the coefficients, and `slots` lists the unknown ones.
pub fn recover_nest(
    sim: &mut Simulator,
    initial: &[ConvexPolygon],
    content: &ContentModel,
    slots: &[Slot],
    opts: &NestOptions,
) -> Result<NestRecovery> {
    let depth = initial.len();
    if depth == 0 || content.layers.len() != depth {
        return Err(Error::Config(format!(
            "nest of {depth} layers needs as many coefficient layers, got {}",
            content.layers.len()
        )));
    }
    content.validate()?;
    if sim.clearance_deficit(initial) > 0.0 {
        return Err(Error::Config(format!("initial layers must be nested with clearance at least {}", sim.h)));
    }
    let mut layers = initial.to_vec();
    let mut current = content.clone();
    let mut stages = Vec::new();
    let mut misfit = f64::INFINITY;
    for l in 1..=depth {
        let fail = |e: Error| Error::NestStage { layer: l, completed: l - 1, source: Box::new(e) };
        let stage_slots: Vec<Slot> = slots.iter().copied().filter(|s| s.region <= l).collect();
        let r = search(sim, &layers, &[l - 1], &current, &stage_slots, &opts.stage).map_err(fail)?;
        if r.misfit >= PENALTY {
            return Err(fail(stagnation(&r, opts.stage.misfit_tol)));
        }
        current = r.content;
        layers = r.interfaces;
        misfit = r.misfit;
        stages.push(StageReport { layer: l, misfit: r.misfit, evaluations: r.evaluations, seconds: r.seconds });
    }
    let mut joint = None;
    if opts.polish && depth > 1 {
        let all: Vec<usize> = (0..depth).collect();
        let r = polish(sim, &layers, &all, &current, slots, &opts.stage, &opts.levenberg)
            .map_err(|e| Error::NestStage { layer: depth, completed: depth, source: Box::new(e) })?;
        if r.misfit <= misfit {
            layers = r.interfaces;
            current = r.content;
            misfit = r.misfit;
        }
        joint = Some(StageReport { layer: depth, misfit: r.misfit, evaluations: r.evaluations, seconds: r.seconds });
    }
    let mut fine = None;
    if let (true, Some(h)) = (opts.polish, opts.fine_polish) {
        if !(h > 0.0 && h < sim.h) {
            return Err(Error::Config(format!("fine polish mesh size {h} must lie in (0, {})", sim.h)));
        }
        let mut fine_sim = Simulator::new(sim.outer.clone(), h, sim.measurements.clone(), sim.opts)?.with_norm(sim.norm);
        let all: Vec<usize> = (0..depth).collect();
        let r = polish(&mut fine_sim, &layers, &all, &current, slots, &opts.stage, &opts.levenberg)
            .map_err(|e| Error::NestStage { layer: depth, completed: depth, source: Box::new(e) })?;
        layers = r.interfaces;
        current = r.content;
        misfit = r.misfit;
        fine = Some(StageReport { layer: depth, misfit: r.misfit, evaluations: r.evaluations, seconds: r.seconds });
    }
    if misfit > opts.stage.misfit_tol {
        let staged: Vec<String> = stages.iter().map(|s| format!("{:.3e}", s.misfit)).collect();
        let diagnostics = format!(
            "stage misfits [{}], polish misfit {}",
            staged.join(", "),
            joint.as_ref().map_or("none".to_string(), |p| format!("{:.3e}", p.misfit))
        );
        return Err(Error::NestStage {
            layer: depth,
            completed: depth - 1,
            source: Box::new(Error::Stagnation { misfit, tolerance: opts.stage.misfit_tol, diagnostics }),
        });
    }
    Ok(NestRecovery { layers, content: current, misfit, stages, polish: joint, fine_polish: fine })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repair_restores_convex_position_and_labels() {
        let pts = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.5, 0.2), Vec2::new(0.5, 1.0)];
        let p = convex_repair(&pts).unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(p.vertex(0), pts[0]);
        assert_eq!(p.vertex(1), pts[1]);
        let tri = [Vec2::new(0.2, 0.3), Vec2::new(0.8, 0.1), Vec2::new(0.5, 0.9)];
        assert_eq!(convex_repair(&tri).unwrap().vertices(), &tri);
    }
}
