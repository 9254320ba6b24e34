use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{config_error, Artifact, Check, Experiment, ExperimentConfig, Outcome};
use crate::forward::{BoundaryData, ContentClass, ContentModel, SolverOptions};
use crate::geometry::{ConvexPolygon, Vec2};
use crate::inverse::{
    cauchy_gap, fit_coefficients, forward_vandermonde, recover_coefficients, recover_convex_polygon, recover_nest,
    synthesize, GaussNewtonOptions, NestOptions, ShapeOptions, Simulator, Slot,
};
use crate::{Result, C64};

/// Synthetic measurements: data are generated on a mesh of size `data_h` and inverted on `h`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct Setup {
    outer: ConvexPolygon,
    psis: Vec<BoundaryData>,
    h: f64,
    data_h: f64,
    #[serde(default)]
    solver: SolverOptions,
}

impl Setup {
    fn check(&self) -> Result<()> {
        if self.psis.is_empty() {
            return Err(config_error("at least one boundary measurement is required"));
        }
        if !(self.h > 0.0 && self.data_h > 0.0 && self.h < self.outer.diameter()) {
            return Err(config_error("mesh sizes must be positive and below the domain diameter"));
        }
        Ok(())
    }

    fn simulator(&self, truth: &[ConvexPolygon], content: &ContentModel) -> Result<Simulator> {
        let data = synthesize(&self.outer, truth, content, &self.psis, self.data_h, &self.solver)?;
        Simulator::new(self.outer.clone(), self.h, data, self.solver)
    }
}

/// Starting interface: an explicit polygon, or a seeded random similarity of the truth.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "type", deny_unknown_fields)]
enum Initial {
    Polygon { polygon: ConvexPolygon },
    /// Translation, rotation and scaling whose combined vertex displacement is at most
    /// `fraction` times the largest centroid-to-vertex distance of the truth.
    Perturbed { fraction: f64 },
}

impl Initial {
    fn check(&self) -> Result<()> {
        match self {
            Initial::Perturbed { fraction } if !(*fraction >= 0.0 && *fraction < 1.0) => {
                Err(config_error(format!("perturbation fraction {fraction} must lie in [0, 1)")))
            }
            _ => Ok(()),
        }
    }

    fn realize(&self, truth: &ConvexPolygon, rng: &mut ChaCha8Rng) -> Result<ConvexPolygon> {
        match self {
            Initial::Polygon { polygon } => Ok(polygon.clone()),
            Initial::Perturbed { fraction } => {
                let c = truth.centroid();
                let radius = truth.vertices().iter().map(|v| v.dist(c)).fold(0.0, f64::max);
                let third = fraction / 3.0;
                let angle = rng.gen_range(-third..=third);
                let scale = 1.0 + rng.gen_range(-third..=third);
                let shift = Vec2::from_angle(rng.gen_range(0.0..std::f64::consts::TAU)) * (radius * rng.gen_range(0.0..=third));
                Ok(truth.scaled(scale)?.rotated(c, angle).translated(shift))
            }
        }
    }
}

fn polygon_csv(polys: &[(&str, &ConvexPolygon)]) -> String {
    let mut s = String::from("polygon,vertex,x,y\n");
    for (name, p) in polys {
        for (i, v) in p.vertices().iter().enumerate() {
            let _ = writeln!(s, "{name},{i},{},{}", v.x, v.y);
        }
    }
    s
}

fn history_csv(history: &[f64]) -> String {
    let mut s = String::from("iteration,misfit\n");
    for (i, m) in history.iter().enumerate() {
        let _ = writeln!(s, "{i},{m}");
    }
    s
}

fn coefficient_checks(out: &mut Outcome, slots: &[Slot], truth: &ContentModel, got: &ContentModel, tol: f64) -> Result<()> {
    for s in slots {
        let (t, g) = (s.get(truth)?, s.get(got)?);
        out.checks.push(Check::below(
            &format!("relative error of u^{} in region {}", s.power, s.region),
            (g - t).norm() / t.norm().max(f64::MIN_POSITIVE),
            tol,
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct ShapeParams {
    setup: Setup,
    truth: ConvexPolygon,
    content: ContentModel,
    initial: Initial,
    #[serde(default)]
    slots: Vec<Slot>,
    #[serde(default)]
    options: ShapeOptions,
    /// Recovered vertices must lie within this multiple of `h` of the truth.
    vertex_tol_factor: f64,
}

/// Single convex inclusion recovered from boundary data.
pub struct ShapeRecover;

impl Experiment for ShapeRecover {
    fn kind(&self) -> &'static str {
        "shapeRecover"
    }

    fn describe(&self) -> &'static str {
        "convex polygon recovery by misfit minimization"
    }

    fn validate(&self, cfg: &ExperimentConfig) -> Result<()> {
        let p: ShapeParams = cfg.params()?;
        p.setup.check()?;
        p.initial.check()?;
        p.content.validate()?;
        if p.content.layers.len() != 1 {
            return Err(config_error("shape recovery takes a single-inclusion content"));
        }
        if !(p.vertex_tol_factor > 0.0) {
            return Err(config_error("vertexTolFactor must be positive"));
        }
        Ok(())
    }

    fn run(&self, cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
        let p: ShapeParams = cfg.params()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let init = p.initial.realize(&p.truth, &mut rng)?;
        let mut sim = p.setup.simulator(std::slice::from_ref(&p.truth), &p.content)?;
        let r = recover_convex_polygon(&mut sim, &init, &p.content, &p.slots, &p.options)?;
        let got = &r.interfaces[0];
        let dist = got.max_vertex_distance(&p.truth);
        out.note("initial_vertex_distance", init.max_vertex_distance(&p.truth));
        out.note("misfit", r.misfit);
        out.note("evaluations", r.evaluations);
        out.checks.push(Check::below("vertex distance", dist, p.vertex_tol_factor * p.setup.h));
        out.artifacts.push(Artifact::csv("polygons", polygon_csv(&[("truth", &p.truth), ("initial", &init), ("recovered", got)])));
        out.artifacts.push(Artifact::csv("history", history_csv(&r.history)));
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "type", deny_unknown_fields)]
enum CoeffMode {
    /// Round trip through the forward map `g_i = sum_j c_j u_i^j`.
    #[serde(rename_all = "camelCase")]
    Vandermonde {
        #[serde(with = "crate::serde_cx::vec")]
        apex: Vec<C64>,
        #[serde(with = "crate::serde_cx::vec")]
        coefficients: Vec<C64>,
        tol: f64,
    },
    /// Coefficients fitted to boundary data with the geometry known.
    #[serde(rename_all = "camelCase")]
    Boundary {
        setup: Setup,
        interfaces: Vec<ConvexPolygon>,
        truth: ContentModel,
        start: ContentModel,
        slots: Vec<Slot>,
        rel_tol: f64,
        #[serde(default)]
        options: GaussNewtonOptions,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct CoeffParams {
    mode: CoeffMode,
}

/// Polynomial content coefficients from apex values or boundary data.
pub struct CoeffRecover;

impl Experiment for CoeffRecover {
    fn kind(&self) -> &'static str {
        "coeffRecover"
    }

    fn describe(&self) -> &'static str {
        "Vandermonde inversion and boundary-misfit coefficient fits"
    }

    fn validate(&self, cfg: &ExperimentConfig) -> Result<()> {
        match cfg.params::<CoeffParams>()?.mode {
            CoeffMode::Vandermonde { apex, coefficients, tol } => {
                if apex.is_empty() || apex.len() != coefficients.len() || !(tol > 0.0) {
                    return Err(config_error("one apex value per coefficient and a positive tolerance"));
                }
            }
            CoeffMode::Boundary { setup, interfaces, truth, start, slots, rel_tol, .. } => {
                setup.check()?;
                truth.validate()?;
                start.validate()?;
                if truth.layers.len() != interfaces.len() || start.layers.len() != interfaces.len() {
                    return Err(config_error("truth and start need one layer per interface"));
                }
                if slots.is_empty() || !(rel_tol > 0.0) {
                    return Err(config_error("list the free coefficients and a positive tolerance"));
                }
                for s in &slots {
                    s.get(&truth)?;
                    s.get(&start)?;
                }
            }
        }
        Ok(())
    }

    fn run(&self, cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
        match cfg.params::<CoeffParams>()?.mode {
            CoeffMode::Vandermonde { apex, coefficients, tol } => {
                let gaps = forward_vandermonde(&apex, &coefficients);
                let r = recover_coefficients(&apex, &gaps)?;
                let mut csv = String::from("j,re_true,im_true,re_recovered,im_recovered\n");
                let mut worst: f64 = 0.0;
                for (j, (t, g)) in coefficients.iter().zip(&r.coefficients).enumerate() {
                    let _ = writeln!(csv, "{},{},{},{},{}", j + 1, t.re, t.im, g.re, g.im);
                    worst = worst.max((g - t).norm() / t.norm().max(1.0));
                }
                out.note("condition", r.condition);
                out.checks.push(Check::below("coefficient error", worst, tol));
                out.artifacts.push(Artifact::csv("coefficients", csv));
            }
            CoeffMode::Boundary { setup, interfaces, truth, start, slots, rel_tol, options } => {
                let mut sim = setup.simulator(&interfaces, &truth)?;
                let fit = fit_coefficients(&mut sim, &interfaces, &start, &slots, &options)?;
                let mut csv = String::from("region,power,re_true,im_true,re_recovered,im_recovered\n");
                for (s, v) in slots.iter().zip(&fit.values) {
                    let t = s.get(&truth)?;
                    let _ = writeln!(csv, "{},{},{},{},{},{}", s.region, s.power, t.re, t.im, v.re, v.im);
                }
                out.note("misfit", fit.misfit);
                out.note("rank_deficient", fit.rank_deficient);
                coefficient_checks(out, &slots, &truth, &fit.content, rel_tol)?;
                out.checks.push(Check::flag("full-rank Gauss-Newton system", !fit.rank_deficient));
                out.artifacts.push(Artifact::csv("coefficients", csv));
                out.artifacts.push(Artifact::csv("history", history_csv(&fit.history)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct NestParams {
    setup: Setup,
    truth: Vec<ConvexPolygon>,
    content: ContentModel,
    start: ContentModel,
    /// One starting interface per layer, outermost first.
    initial: Vec<Initial>,
    slots: Vec<Slot>,
    #[serde(default)]
    options: NestOptions,
    vertex_tol_factor: f64,
    coefficient_rel_tol: f64,
}

impl NestParams {
    /// Measurements the class needs: the total coefficient count for class A, one for class B.
    fn required_measurements(&self) -> usize {
        match self.content.class {
            ContentClass::A => self.content.layers.iter().map(Vec::len).sum(),
            _ => 1,
        }
    }
}

/// Nested-layer recovery by outside-in peeling.
pub struct NestRecover;

impl Experiment for NestRecover {
    fn kind(&self) -> &'static str {
        "nestRecover"
    }

    fn describe(&self) -> &'static str {
        "layer-by-layer recovery of nested polygons and their contents"
    }

    fn validate(&self, cfg: &ExperimentConfig) -> Result<()> {
        let p: NestParams = cfg.params()?;
        p.setup.check()?;
        p.content.validate()?;
        p.start.validate()?;
        let depth = p.truth.len();
        if depth < 2 || p.content.layers.len() != depth || p.start.layers.len() != depth || p.initial.len() != depth {
            return Err(config_error("a nest needs two or more layers with matching content, start and initial entries"));
        }
        if !matches!(p.content.class, ContentClass::A | ContentClass::B) || p.start.class != p.content.class {
            return Err(config_error("nest content must be class A or B, shared by truth and start"));
        }
        let need = p.required_measurements();
        if p.setup.psis.len() < need {
            return Err(config_error(format!("class {:?} needs {need} measurements, got {}", p.content.class, p.setup.psis.len())));
        }
        for i in &p.initial {
            i.check()?;
        }
        for s in &p.slots {
            s.get(&p.content)?;
            s.get(&p.start)?;
        }
        if !(p.vertex_tol_factor > 0.0 && p.coefficient_rel_tol > 0.0) {
            return Err(config_error("tolerances must be positive"));
        }
        Ok(())
    }

    fn run(&self, cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
        let p: NestParams = cfg.params()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let init = p.initial.iter().zip(&p.truth).map(|(i, t)| i.realize(t, &mut rng)).collect::<Result<Vec<_>>>()?;
        let mut sim = p.setup.simulator(&p.truth, &p.content)?;
        let r = recover_nest(&mut sim, &init, &p.start, &p.slots, &p.options)?;
        let mut polys = Vec::new();
        for (l, (t, g)) in p.truth.iter().zip(&r.layers).enumerate() {
            out.checks.push(Check::below(&format!("vertex distance of layer {}", l + 1), g.max_vertex_distance(t), p.vertex_tol_factor * p.setup.h));
            polys.push((format!("truth_{}", l + 1), t));
            polys.push((format!("initial_{}", l + 1), &init[l]));
            polys.push((format!("recovered_{}", l + 1), g));
        }
        coefficient_checks(out, &p.slots, &p.content, &r.content, p.coefficient_rel_tol)?;
        out.note("misfit", r.misfit);
        out.note("measurements", p.setup.psis.len());
        let named: Vec<(&str, &ConvexPolygon)> = polys.iter().map(|(n, g)| (n.as_str(), *g)).collect();
        out.artifacts.push(Artifact::csv("polygons", polygon_csv(&named)));
        let mut csv = String::from("stage,layer,misfit,evaluations\n");
        let labelled = r.stages.iter().map(|s| ("peel", s)).chain(r.polish.iter().map(|s| ("polish", s)));
        for (label, s) in labelled.chain(r.fine_polish.iter().map(|s| ("finePolish", s))) {
            let _ = writeln!(csv, "{label},{},{},{}", s.layer, s.misfit, s.evaluations);
        }
        out.artifacts.push(Artifact::csv("stages", csv));
        out.artifacts.push(Artifact::json("content", &r.content)?);
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct Configuration {
    interfaces: Vec<ConvexPolygon>,
    content: ContentModel,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "type", deny_unknown_fields)]
enum Expect {
    #[serde(rename_all = "camelCase")]
    Distinct { min_gap: f64 },
    Identical,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct DistinguishParams {
    outer: ConvexPolygon,
    first: Configuration,
    second: Configuration,
    psis: Vec<BoundaryData>,
    h: f64,
    expect: Expect,
    #[serde(default)]
    solver: SolverOptions,
}

/// Cauchy-data gap between two configurations under the same measurements.
pub struct Distinguish;

impl Experiment for Distinguish {
    fn kind(&self) -> &'static str {
        "distinguish"
    }

    fn describe(&self) -> &'static str {
        "Cauchy-data gaps between two inclusion configurations"
    }

    fn validate(&self, cfg: &ExperimentConfig) -> Result<()> {
        let p: DistinguishParams = cfg.params()?;
        for c in [&p.first, &p.second] {
            c.content.validate()?;
            if c.content.layers.len() != c.interfaces.len() {
                return Err(config_error("one content layer per interface"));
            }
        }
        if p.psis.is_empty() || !(p.h > 0.0 && p.h < p.outer.diameter()) {
            return Err(config_error("need measurements and a positive mesh size below the domain diameter"));
        }
        if let Expect::Distinct { min_gap } = p.expect {
            if !(min_gap > 0.0) {
                return Err(config_error("minGap must be positive"));
            }
        }
        Ok(())
    }

    fn run(&self, cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
        let p: DistinguishParams = cfg.params()?;
        let a = synthesize(&p.outer, &p.first.interfaces, &p.first.content, &p.psis, p.h, &p.solver)?;
        let b = synthesize(&p.outer, &p.second.interfaces, &p.second.content, &p.psis, p.h, &p.solver)?;
        let mut csv = String::from("measurement,gap\n");
        for (i, (x, y)) in a.iter().zip(&b).enumerate() {
            let gap = cauchy_gap(&x.data, &y.data)?;
            let _ = writeln!(csv, "{i},{gap}");
            out.checks.push(match p.expect {
                Expect::Distinct { min_gap } => Check::above(&format!("gap for measurement {i}"), gap, min_gap),
                Expect::Identical => Check::below(&format!("gap for measurement {i}"), gap, 0.0),
            });
        }
        out.artifacts.push(Artifact::csv("gaps", csv));
        Ok(())
    }
}
