use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gap::{dirichlet_norm, flux_moments, gap_in, sample_flux, GapNorm};
use crate::forward::{measure, BoundaryData, CauchyData, ContentModel, FemSpace, SolverOptions};
use crate::geometry::ConvexPolygon;
use crate::mesh::{triangulate, Morpher, TriMesh};
use crate::{Error, Result, C64};

/// Misfit norm unless configured otherwise.
pub const DEFAULT_NORM: GapNorm = GapNorm::Moments { degree: 8 };

/// Dirichlet data and the Cauchy data it produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Measurement {
    pub psi: BoundaryData,
    pub data: CauchyData,
}

/// Synthetic measurements of a known configuration on a mesh of size `h`.
pub fn synthesize(
    outer: &ConvexPolygon,
    interfaces: &[ConvexPolygon],
    content: &ContentModel,
    psis: &[BoundaryData],
    h: f64,
    opts: &SolverOptions,
) -> Result<Vec<Measurement>> {
    let space = FemSpace::new(triangulate(outer, interfaces, h)?);
    psis.par_iter()
        .map(|psi| Ok(Measurement { psi: psi.clone(), data: measure(&space, content, psi, opts)?.1 }))
        .collect()
}

/// Forward model for misfit evaluation on a fixed outer domain.
///
/// Interface moves are absorbed by morphing one reference mesh, so the misfit varies
/// smoothly with the geometry; a fresh triangulation replaces the reference whenever the
/// morph inverts an element or the interface layout changes.
pub struct Simulator {
    pub outer: ConvexPolygon,
    pub h: f64,
    pub measurements: Vec<Measurement>,
    pub opts: SolverOptions,
    pub norm: GapNorm,
    pub remeshes: usize,
    morpher: Option<Morpher>,
}

impl Simulator {
    pub fn new(outer: ConvexPolygon, h: f64, measurements: Vec<Measurement>, opts: SolverOptions) -> Result<Self> {
        if measurements.is_empty() {
            return Err(Error::Config("recovery needs at least one measurement".into()));
        }
        Ok(Self { outer, h, measurements, opts, norm: DEFAULT_NORM, remeshes: 0, morpher: None })
    }

    pub fn with_norm(mut self, norm: GapNorm) -> Self {
        self.norm = norm;
        self
    }

    /// Nested layout check: every interface lies inside its predecessor (the first inside
    /// the domain) with boundary clearance at least `h`, and has sides of length at least `h`
    /// so the mesh resolves it. Returns the worst shortfall.
    pub fn clearance_deficit(&self, interfaces: &[ConvexPolygon]) -> f64 {
        let mut deficit: f64 = 0.0;
        let mut parent = &self.outer;
        for poly in interfaces {
            // For nested convex sets the boundary gap is the smallest vertex margin.
            let gap = poly.vertices().iter().map(|&v| parent.inward_margin(v)).fold(f64::INFINITY, f64::min);
            deficit = deficit.max(self.h - gap);
            let shortest = poly.edges().map(|(a, b)| a.dist(b)).fold(f64::INFINITY, f64::min);
            deficit = deficit.max(self.h - shortest);
            parent = poly;
        }
        deficit.max(0.0)
    }

    pub fn mesh_for(&mut self, interfaces: &[ConvexPolygon]) -> Result<TriMesh> {
        if let Some(m) = &self.morpher {
            match m.apply(interfaces) {
                Ok(mesh) => return Ok(mesh),
                Err(Error::InvertedElement { .. } | Error::Dimension(_)) => {}
                Err(e) => return Err(e),
            }
        }
        let mesh = triangulate(&self.outer, interfaces, self.h)?;
        self.morpher = Some(Morpher::new(mesh.clone())?);
        self.remeshes += 1;
        Ok(mesh)
    }

    /// Simulated Cauchy data for every measurement, solved in parallel.
    pub fn simulate(&mut self, interfaces: &[ConvexPolygon], content: &ContentModel) -> Result<Vec<CauchyData>> {
        let space = FemSpace::new(self.mesh_for(interfaces)?);
        self.simulate_on(&space, content)
    }

    pub fn simulate_on(&self, space: &FemSpace, content: &ContentModel) -> Result<Vec<CauchyData>> {
        self.measurements
            .par_iter()
            .map(|m| Ok(measure(space, content, &m.psi, &self.opts)?.1))
            .collect()
    }

    /// `sum_m gap(measured_m, simulated_m)^2`.
    pub fn misfit(&mut self, interfaces: &[ConvexPolygon], content: &ContentModel) -> Result<f64> {
        let sim = self.simulate(interfaces, content)?;
        self.misfit_of(&sim)
    }

    pub fn misfit_of(&self, simulated: &[CauchyData]) -> Result<f64> {
        let mut total = 0.0;
        for (m, s) in self.measurements.iter().zip(simulated) {
            total += gap_in(&m.data, s, self.norm)?.powi(2);
        }
        Ok(total)
    }

    pub fn residuals_for(&mut self, interfaces: &[ConvexPolygon], content: &ContentModel) -> Result<Vec<C64>> {
        let sim = self.simulate(interfaces, content)?;
        self.residuals(&sim)
    }

    /// Residual vector whose squared norm is the misfit: flux moments for the moment norm,
    /// or length-weighted nodal flux differences (a lumped L2 misfit) otherwise.
    pub fn residuals(&self, simulated: &[CauchyData]) -> Result<Vec<C64>> {
        if let GapNorm::Moments { degree } = self.norm {
            let mut out = Vec::new();
            for (m, s) in self.measurements.iter().zip(simulated) {
                out.extend(flux_moments(s, &m.data, degree)?);
            }
            return Ok(out);
        }
        let mut out = Vec::new();
        for (m, s) in self.measurements.iter().zip(simulated) {
            let norm = dirichlet_norm(&m.data);
            let scale = if norm > 0.0 { 1.0 / norm } else { 1.0 };
            for r in s.side_ranges() {
                let a = &s.arclen[r.clone()];
                for (k, i) in r.clone().enumerate() {
                    let lo = if k == 0 { a[0] } else { 0.5 * (a[k - 1] + a[k]) };
                    let hi = if k + 1 == a.len() { a[k] } else { 0.5 * (a[k] + a[k + 1]) };
                    let meas = sample_flux(&m.data, s.side[i], s.arclen[i]).ok_or_else(|| {
                        Error::MismatchedData(format!("measurement lacks side {}", s.side[i]))
                    })?;
                    out.push((s.dnu[i] - meas) * ((hi - lo).sqrt() * scale));
                }
            }
        }
        Ok(out)
    }
}
