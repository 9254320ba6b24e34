use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::check::{check_assumption, AdmissibilityOptions, AdmissibilityReport, Assumption};
use crate::fit::{power_law_fit, LinearFit};
use crate::forward::{solve_semilinear, BoundaryData, ContentClass, ContentModel, FemSpace, SolverOptions};
use crate::geometry::{ConvexPolygon, Vec2};
use crate::mesh::triangulate;
use crate::{Error, Result, C64};

/// `scale * eps^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Scaled {
    #[serde(with = "crate::serde_cx")]
    pub scale: C64,
    pub exponent: f64,
}

impl Scaled {
    pub fn new(scale: C64, exponent: f64) -> Self {
        Self { scale, exponent }
    }

    pub fn at(&self, eps: f64) -> C64 {
        self.scale * eps.powf(self.exponent)
    }
}

fn default_min_slope() -> f64 {
    1.1
}

/// Small-data configuration: background `k^2 u` with `k = wavenumber * eps^wavenumber_exponent`,
/// layer `l` content `linear[l](eps) u + higher[l][0] u^2 + ...`, data `eps exp(i k x . d)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExpansionConfig {
    pub outer: ConvexPolygon,
    pub interfaces: Vec<ConvexPolygon>,
    pub class: ContentClass,
    pub wavenumber: f64,
    pub wavenumber_exponent: f64,
    /// Angle of the propagation direction `d`.
    pub direction: f64,
    pub linear: Vec<Scaled>,
    #[serde(with = "crate::serde_cx::vec2", default)]
    pub higher: Vec<Vec<C64>>,
    pub h: f64,
    /// Minimal log-log slope of `||v||` against `eps` certifying `o(eps)`.
    #[serde(default = "default_min_slope")]
    pub min_slope: f64,
}

impl ExpansionConfig {
    pub fn validate(&self) -> Result<()> {
        let n = self.interfaces.len();
        if n == 0 || self.linear.len() != n {
            return Err(Error::Config(format!("{n} interfaces need as many scaled linear coefficients, got {}", self.linear.len())));
        }
        if self.higher.len() > n {
            return Err(Error::Config(format!("higher-order coefficients for {} layers, only {n} exist", self.higher.len())));
        }
        if !(self.h > 0.0) || !self.wavenumber.is_finite() || !(self.direction.is_finite()) {
            return Err(Error::Config("mesh size, wavenumber and direction must be finite and h positive".into()));
        }
        self.content(0.5).map(|_| ())
    }

    pub fn wavenumber_at(&self, eps: f64) -> f64 {
        self.wavenumber * eps.powf(self.wavenumber_exponent)
    }

    pub fn content(&self, eps: f64) -> Result<ContentModel> {
        let k = self.wavenumber_at(eps);
        let layers = self
            .linear
            .iter()
            .enumerate()
            .map(|(l, s)| {
                let mut c = vec![s.at(eps)];
                c.extend(self.higher.get(l).into_iter().flatten().copied());
                c
            })
            .collect();
        ContentModel::new(C64::new(k * k, 0.0), layers, self.class)
    }

    pub fn psi(&self, eps: f64, amplitude: f64) -> BoundaryData {
        BoundaryData::PlaneWave {
            amplitude: C64::new(eps * amplitude, 0.0),
            wavenumber: self.wavenumber_at(eps),
            direction: Vec2::from_angle(self.direction),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExpansionRow {
    pub eps: f64,
    pub wavenumber: f64,
    pub newton_iterations: usize,
    /// H1 surrogate of `v = u - psi`.
    pub v_norm: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExpansionTable {
    pub rows: Vec<ExpansionRow>,
    pub fit: LinearFit,
    pub strictly_decreasing: bool,
    pub min_slope: f64,
    pub pass: bool,
}

impl ExpansionTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("eps,v_norm,ratio\n");
        for r in &self.rows {
            s.push_str(&format!("{:e},{:e},{:e}\n", r.eps, r.v_norm, r.ratio));
        }
        s
    }
}

fn check_grid(eps: &[f64]) -> Result<()> {
    if eps.len() < 2 || eps.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::Config("the eps grid needs at least two positive values".into()));
    }
    if eps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Config("the eps grid must be strictly decreasing".into()));
    }
    Ok(())
}

fn expansion(cfg: &ExpansionConfig, eps: &[f64], opts: &SolverOptions) -> Result<ExpansionTable> {
    cfg.validate()?;
    check_grid(eps)?;
    let space = FemSpace::new(triangulate(&cfg.outer, &cfg.interfaces, cfg.h)?);
    let rows = eps
        .par_iter()
        .map(|&e| {
            let content = cfg.content(e)?;
            let psi = cfg.psi(e, 1.0);
            let sol = solve_semilinear(&space, &content, &|p| psi.eval(p), None, opts)?;
            let mut v = sol.field.clone();
            for (val, p) in v.values.iter_mut().zip(&space.mesh.nodes) {
                *val -= psi.eval(*p);
            }
            let v_norm = v.h1_norm();
            Ok(ExpansionRow { eps: e, wavenumber: cfg.wavenumber_at(e), newton_iterations: sol.iterations, v_norm, ratio: v_norm / e })
        })
        .collect::<Result<Vec<_>>>()?;
    let fit = power_law_fit(
        &rows.iter().map(|r| r.eps).collect::<Vec<_>>(),
        &rows.iter().map(|r| r.v_norm).collect::<Vec<_>>(),
    )?;
    let strictly_decreasing = rows.windows(2).all(|w| w[1].ratio < w[0].ratio);
    Ok(ExpansionTable { pass: strictly_decreasing && fit.slope > cfg.min_slope, rows, fit, strictly_decreasing, min_slope: cfg.min_slope })
}

/// `||u - psi||` along a decreasing `eps` grid for a single inclusion; passes when
/// `||v|| / eps` strictly decreases and `||v||` decays faster than `eps^min_slope`.
pub fn small_data_expansion(cfg: &ExpansionConfig, eps: &[f64], opts: &SolverOptions) -> Result<ExpansionTable> {
    if cfg.interfaces.len() != 1 {
        return Err(Error::Config(format!("single-inclusion expansion given {} interfaces", cfg.interfaces.len())));
    }
    expansion(cfg, eps, opts)
}

/// Nest version of [`small_data_expansion`], with every layer's linear coefficient scaled.
pub fn nest_small_data_expansion(cfg: &ExpansionConfig, eps: &[f64], opts: &SolverOptions) -> Result<ExpansionTable> {
    if !matches!(cfg.class, ContentClass::A | ContentClass::B) {
        return Err(Error::Config("nest expansion needs class A or B content".into()));
    }
    expansion(cfg, eps, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LeadingOrderRow {
    pub eps: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub report: AdmissibilityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LeadingOrderTable {
    pub assumption: Assumption,
    pub rows: Vec<LeadingOrderRow>,
    pub bounds: [f64; 2],
    /// All ratios at the smallest `eps` lie within `bounds`.
    pub pass: bool,
}

impl LeadingOrderTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("eps,min_ratio,max_ratio,worst_margin,admissible\n");
        for r in &self.rows {
            s.push_str(&format!("{:e},{},{},{:e},{}\n", r.eps, r.min_ratio, r.max_ratio, r.report.worst_margin, r.report.pass));
        }
        s
    }
}

/// The assumption a configuration and measurement family exercise.
pub fn assumption_for(class: ContentClass, amplitudes: &[Vec<f64>]) -> Assumption {
    match class {
        ContentClass::SingleLayer if amplitudes.iter().map(Vec::len).sum::<usize>() > 1 => Assumption::B,
        ContentClass::SingleLayer => Assumption::A,
        ContentClass::A => Assumption::C,
        ContentClass::B => Assumption::D,
    }
}

/// Ratios of every admissibility quantity to its small-data leading term along the `eps`
/// grid, with data `eps a_j exp(i k x . d)` for the amplitudes `a_j` of each family.
pub fn leading_order_ratios(
    cfg: &ExpansionConfig,
    eps: &[f64],
    amplitudes: &[Vec<f64>],
    bounds: [f64; 2],
    opts: &AdmissibilityOptions,
) -> Result<LeadingOrderTable> {
    cfg.validate()?;
    check_grid(eps)?;
    let assumption = assumption_for(cfg.class, amplitudes);
    let space = FemSpace::new(triangulate(&cfg.outer, &cfg.interfaces, cfg.h)?);
    let rows = eps
        .iter()
        .map(|&e| {
            let families: Vec<Vec<BoundaryData>> =
                amplitudes.iter().map(|f| f.iter().map(|&a| cfg.psi(e, a)).collect()).collect();
            let report = check_assumption(assumption, &space, &cfg.content(e)?, &families, opts)?;
            let ratios = report.leading_ratios();
            if ratios.is_empty() {
                return Err(Error::Config("every leading-order term vanishes".into()));
            }
            let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            let max_ratio = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Ok(LeadingOrderRow { eps: e, min_ratio, max_ratio, report })
        })
        .collect::<Result<Vec<_>>>()?;
    let last = rows.last().expect("grid is non-empty");
    let pass = last.min_ratio >= bounds[0] && last.max_ratio <= bounds[1];
    Ok(LeadingOrderTable { assumption, rows, bounds, pass })
}
