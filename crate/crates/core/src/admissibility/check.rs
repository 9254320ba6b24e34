use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::forward::{solve_semilinear, BoundaryData, ContentModel, FemField, FemSpace, SolverOptions};
use crate::geometry::Vec2;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Assumption {
    A,
    B,
    C,
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct AdmissibilityOptions {
    /// Quantities must exceed this multiple of their discretization error estimate.
    pub tolerance_factor: f64,
    /// Fixed threshold replacing the estimate-based one.
    pub absolute_tolerance: Option<f64>,
    pub solver: SolverOptions,
}

impl Default for AdmissibilityOptions {
    fn default() -> Self {
        Self { tolerance_factor: 1e3, absolute_tolerance: None, solver: SolverOptions::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Quantity {
    /// Outer content minus inner content at a vertex, `f_{l-1}(u) - f_l(u)`.
    ContentJump,
    /// `prod_{i<j} (u_j - u_i)` over the layer's measurement family.
    Separation,
    /// `u` itself.
    Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TestedQuantity {
    pub quantity: Quantity,
    /// 1-based layer whose vertex is tested.
    pub layer: usize,
    pub vertex: usize,
    pub point: Vec2,
    /// Indices into the layer's measurement family.
    pub measurements: Vec<usize>,
    #[serde(with = "crate::serde_cx")]
    pub value: C64,
    /// The same expression with `u` replaced by the boundary data's extension and every
    /// content replaced by its linear part.
    #[serde(with = "crate::serde_cx")]
    pub leading: C64,
    /// `|q_h - q_{h/2}| / 3`.
    pub error_estimate: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl TestedQuantity {
    pub fn leading_ratio(&self) -> f64 {
        self.value.norm() / self.leading.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SatisfiedBy {
    Vertices,
    Exterior,
}

/// The second alternative of Assumption A: the content gap is nonzero at every
/// interior node outside the inclusion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExteriorCheck {
    pub nodes: usize,
    pub min_modulus: f64,
    pub worst_point: Option<Vec2>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AdmissibilityReport {
    pub assumption: Assumption,
    pub quantities: Vec<TestedQuantity>,
    /// Smallest modulus among the vertex quantities.
    pub worst_margin: f64,
    pub exterior: Option<ExteriorCheck>,
    pub satisfied_by: Option<SatisfiedBy>,
    pub pass: bool,
}

impl AdmissibilityReport {
    /// `|value| / |leading|` for every quantity with a nonzero leading term.
    pub fn leading_ratios(&self) -> Vec<f64> {
        self.quantities.iter().filter(|q| q.leading.norm() > 0.0).map(|q| q.leading_ratio()).collect()
    }
}

struct Pair {
    coarse: FemField,
    fine: FemField,
}

fn nodal(field: &FemField, node: Option<usize>, p: Vec2) -> Result<C64> {
    match node {
        Some(i) => Ok(field.values[i]),
        None => field.interpolate(p).ok_or_else(|| Error::Geometry(format!("vertex ({}, {}) lies outside the mesh", p.x, p.y))),
    }
}

fn linear_part(content: &ContentModel, region: usize) -> C64 {
    content.coeffs(region)[0]
}

/// Checks one of Assumptions A-D at every vertex of the relevant layers.
///
/// `families[l]` holds the Dirichlet data for layer `l + 1`; a single family is shared by
/// all layers. Fields are solved on `space` and on its uniform refinement, which supplies
/// the error estimate behind each threshold.
pub fn check_assumption(
    kind: Assumption,
    space: &FemSpace,
    content: &ContentModel,
    families: &[Vec<BoundaryData>],
    opts: &AdmissibilityOptions,
) -> Result<AdmissibilityReport> {
    let mesh = &space.mesh;
    let depth = mesh.interfaces.len();
    if depth == 0 {
        return Err(Error::Config("admissibility needs at least one inclusion".into()));
    }
    if families.is_empty() || families.iter().any(|f| f.is_empty()) {
        return Err(Error::Config("every measurement family needs at least one datum".into()));
    }
    if families.len() != 1 && families.len() != depth {
        return Err(Error::Config(format!("{} measurement families for {depth} layers", families.len())));
    }
    let (layers, separation, values) = match kind {
        Assumption::A | Assumption::B if depth != 1 => {
            return Err(Error::Config(format!("Assumption {kind:?} concerns a single inclusion, got {depth} layers")));
        }
        Assumption::A => (1, false, false),
        Assumption::B => (1, true, false),
        Assumption::C => (depth, true, false),
        Assumption::D => (depth, false, true),
    };
    if matches!(kind, Assumption::A | Assumption::D) && families.iter().any(|f| f.len() != 1) {
        return Err(Error::Config(format!("Assumption {kind:?} uses a single measurement")));
    }
    let family = |l: usize| if families.len() == 1 { &families[0] } else { &families[l - 1] };

    let fine_space = FemSpace::new(mesh.refine());
    let mut distinct: Vec<&BoundaryData> = Vec::new();
    for f in families {
        for psi in f {
            if !distinct.contains(&psi) {
                distinct.push(psi);
            }
        }
    }
    let solve = |s: &FemSpace, psi: &BoundaryData| -> Result<FemField> {
        Ok(solve_semilinear(s, content, &|p| psi.eval(p), None, &opts.solver)?.field)
    };
    let fields: Vec<Pair> = distinct
        .par_iter()
        .map(|psi| Ok(Pair { coarse: solve(space, psi)?, fine: solve(&fine_space, psi)? }))
        .collect::<Result<_>>()?;
    let index_of = |psi: &BoundaryData| distinct.iter().position(|d| *d == psi).expect("collected above");

    let threshold = |estimate: f64| opts.absolute_tolerance.unwrap_or(opts.tolerance_factor * estimate);
    let mut quantities = Vec::new();
    let mut push = |quantity, layer, vertex, point, measurements, (coarse, fine): (C64, C64), leading| {
        let error_estimate = (coarse - fine).norm() / 3.0;
        let tolerance = threshold(error_estimate);
        quantities.push(TestedQuantity {
            quantity,
            layer,
            vertex,
            point,
            measurements,
            value: coarse,
            leading,
            error_estimate,
            tolerance,
            pass: coarse.norm() > tolerance,
        });
    };
    for l in 1..=layers {
        let fam = family(l);
        let outer_lin = linear_part(content, l - 1);
        let inner_lin = linear_part(content, l);
        for (vi, &x) in mesh.interfaces[l - 1].vertices().iter().enumerate() {
            // Uniform refinement keeps coarse node indices.
            let node = mesh.node_at(x, 1e-12);
            let mut us = Vec::with_capacity(fam.len());
            for psi in fam {
                let pair = &fields[index_of(psi)];
                us.push((nodal(&pair.coarse, node, x)?, nodal(&pair.fine, node, x)?, psi.eval(x)));
            }
            let jump = |u: C64| content.eval(l - 1, u) - content.eval(l, u);
            for (j, &(uc, uf, psi)) in us.iter().enumerate() {
                push(Quantity::ContentJump, l, vi, x, vec![j], (jump(uc), jump(uf)), (outer_lin - inner_lin) * psi);
                if values {
                    push(Quantity::Value, l, vi, x, vec![j], (uc, uf), psi);
                }
            }
            if separation && us.len() > 1 {
                let one = C64::new(1.0, 0.0);
                let (mut pc, mut pf, mut pl) = (one, one, one);
                for j in 0..us.len() {
                    for i in 0..j {
                        pc *= us[j].0 - us[i].0;
                        pf *= us[j].1 - us[i].1;
                        pl *= us[j].2 - us[i].2;
                    }
                }
                push(Quantity::Separation, l, vi, x, (0..us.len()).collect(), (pc, pf), pl);
            }
        }
    }
    let worst_margin = quantities.iter().map(|q| q.value.norm()).fold(f64::INFINITY, f64::min);
    let vertices_pass = quantities.iter().all(|q| q.pass);

    let exterior = if kind == Assumption::A {
        let pair = &fields[index_of(&families[0][0])];
        let inclusion = &mesh.interfaces[0];
        let mut check = ExteriorCheck { nodes: 0, min_modulus: f64::INFINITY, worst_point: None, pass: true };
        for (i, &p) in mesh.nodes.iter().enumerate() {
            if space.is_boundary[i] || inclusion.contains_closed(p, 1e-12) {
                continue;
            }
            let gap = |u: C64| content.eval(0, u) - content.eval(1, u);
            let (gc, gf) = (gap(pair.coarse.values[i]), gap(pair.fine.values[i]));
            check.nodes += 1;
            if gc.norm() < check.min_modulus {
                check.min_modulus = gc.norm();
                check.worst_point = Some(p);
            }
            check.pass &= gc.norm() > threshold((gc - gf).norm() / 3.0);
        }
        check.pass &= check.nodes > 0;
        Some(check)
    } else {
        None
    };
    let satisfied_by = if vertices_pass {
        Some(SatisfiedBy::Vertices)
    } else if exterior.as_ref().is_some_and(|e| e.pass) {
        Some(SatisfiedBy::Exterior)
    } else {
        None
    };
    Ok(AdmissibilityReport {
        assumption: kind,
        quantities,
        worst_margin,
        exterior,
        pass: satisfied_by.is_some(),
        satisfied_by,
    })
}
