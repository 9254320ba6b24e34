use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fields::Field;
use super::green::{boundary_integral, flank_mismatch, BoundaryPart};
use crate::fit::fit_algebraic_tail;
use crate::geometry::CornerKind;
use crate::probes::{corner_integral, CgoProbe, IntegralMethod};
use crate::quadrature::QuadOptions;
use crate::{Error, Result, C64};

/// Which boundary pieces enter the numerator of `E(tau)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum FlankPolicy {
    /// Lid only; the flank Cauchy data of `u` and `v` must agree.
    RequireMatched,
    /// Whole corner boundary; no flank hypothesis.
    IncludeFlanks,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct ExtractOptions {
    pub policy: FlankPolicy,
    pub flank_tol: f64,
    pub flank_samples: usize,
    pub rel_tol: f64,
    pub beta_lo: f64,
    pub beta_hi: f64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self {
            policy: FlankPolicy::RequireMatched,
            flank_tol: 1e-10,
            flank_samples: 32,
            rel_tol: 1e-10,
            beta_lo: 0.05,
            beta_hi: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExtractionResult {
    pub tau_grid: Vec<f64>,
    #[serde(with = "crate::serde_cx::vec")]
    pub estimates: Vec<C64>,
    #[serde(with = "crate::serde_cx")]
    pub limit: C64,
    /// Fitted `beta` in `E(tau) = L + C tau^-beta` over the upper half of the grid.
    pub error_order: f64,
    #[serde(with = "crate::serde_cx")]
    pub coefficient: C64,
    pub rms_residual: f64,
    pub flank_mismatch: f64,
    pub policy: FlankPolicy,
}

impl ExtractionResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("tau,re_e,im_e\n");
        for (t, e) in self.tau_grid.iter().zip(&self.estimates) {
            let _ = writeln!(s, "{t},{},{}", e.re, e.im);
        }
        s
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "limit": [self.limit.re, self.limit.im],
            "errorOrder": self.error_order,
            "flankMismatch": self.flank_mismatch,
        })
    }
}

fn estimates(probe: &CgoProbe, u: &dyn Field, v: &dyn Field, taus: &[f64], opts: &ExtractOptions) -> Result<(Vec<C64>, f64)> {
    if taus.len() < 4 {
        return Err(Error::DegenerateFit(format!("extraction needs at least 4 tau values, got {}", taus.len())));
    }
    let mismatch = flank_mismatch(&probe.corner, u, v, opts.flank_samples)?;
    if opts.policy == FlankPolicy::RequireMatched && mismatch > opts.flank_tol {
        return Err(Error::FlankMismatch { mismatch, tolerance: opts.flank_tol });
    }
    let part = match opts.policy {
        FlankPolicy::RequireMatched => BoundaryPart::Lid,
        FlankPolicy::IncludeFlanks => BoundaryPart::All,
    };
    let method = if probe.corner.kind == CornerKind::Sector {
        IntegralMethod::ClosedForm2D
    } else {
        IntegralMethod::Quadrature
    };
    let q = QuadOptions::rel(opts.rel_tol);
    let est = taus
        .par_iter()
        .map(|&tau| {
            let p = probe.at_tau(tau);
            let num = boundary_integral(&p, u, v, part, q)?;
            let den = corner_integral(&p, method, q)?;
            Ok(num / den)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((est, mismatch))
}

fn finish(taus: &[f64], est: Vec<C64>, mismatch: f64, opts: &ExtractOptions) -> Result<ExtractionResult> {
    let half = taus.len() / 2;
    let fit = fit_algebraic_tail(&taus[half..], &est[half..], opts.beta_lo, opts.beta_hi)?;
    Ok(ExtractionResult {
        tau_grid: taus.to_vec(),
        estimates: est,
        limit: fit.limit,
        error_order: fit.beta,
        coefficient: fit.coefficient,
        rms_residual: fit.rms_residual,
        flank_mismatch: mismatch,
        policy: opts.policy,
    })
}

/// `E(tau) = [boundary integral of u0 d_nu(u - v) - (u - v) d_nu u0] / int u0`, whose limit is
/// `lambda v(apex) - f(apex, u(apex))` when `Delta u = -f(x, u)` and `Delta v = -lambda v`.
pub fn extract_apex_value(
    probe: &CgoProbe,
    u: &dyn Field,
    v: &dyn Field,
    taus: &[f64],
    opts: &ExtractOptions,
) -> Result<ExtractionResult> {
    let (est, mismatch) = estimates(probe, u, v, taus, opts)?;
    finish(taus, est, mismatch, opts)
}

/// Limit `f1(apex, u(apex)) - f2(apex, v(apex))` for `Delta u = -f1(x, u)`, `Delta v = -f2(x, v)`.
pub fn extract_two_content_gap(
    probe: &CgoProbe,
    u: &dyn Field,
    v: &dyn Field,
    taus: &[f64],
    opts: &ExtractOptions,
) -> Result<ExtractionResult> {
    let (est, mismatch) = estimates(probe, u, v, taus, opts)?;
    finish(taus, est.into_iter().map(|e| -e).collect(), mismatch, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::log_space;
    use crate::geometry::{TruncatedCorner, Vec2, Vec3};
    use crate::indicator::{FieldDiff, FlankBump, PlaneWave, RadialBump, ShiftedField};
    use std::f64::consts::PI;

    fn corner() -> TruncatedCorner {
        TruncatedCorner::sector(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), PI / 4.0, 1.0).unwrap()
    }

    #[test]
    fn matched_fields_give_zero_limit() {
        let c = corner();
        let probe = CgoProbe::new(c.clone(), 1.0).unwrap();
        let v = PlaneWave { amplitude: C64::new(1.0, 0.0), k: 1.3, dir: Vec3::new(0.0, 1.0, 0.0) };
        let w = FlankBump::for_sector(&c, C64::new(1.0, 0.0), Vec2::new(0.5, 0.2)).unwrap();
        let u = FieldDiff::sum(&v, &w);
        let taus = log_space(20.0, 200.0, 10);
        let r = extract_apex_value(&probe, &u, &v, &taus, &ExtractOptions::default()).unwrap();
        assert!(r.limit.norm() < 1e-3);
        assert!(r.flank_mismatch < 1e-12);
        // u = v: identical systems.
        let same = extract_two_content_gap(&probe, &v, &v, &taus, &ExtractOptions::default()).unwrap();
        assert!(same.limit.norm() < 1e-12);
    }

    #[test]
    fn flank_mismatch_is_rejected() {
        let c = corner();
        let probe = CgoProbe::new(c.clone(), 1.0).unwrap();
        let v = PlaneWave { amplitude: C64::new(1.0, 0.0), k: 1.3, dir: Vec3::new(0.0, 1.0, 0.0) };
        let w = RadialBump { apex: c.apex, dim: 2, c: C64::new(1.0, 0.0), kappa: C64::new(0.0, 0.0), alpha: 1.0 };
        let u = FieldDiff::sum(&v, &w);
        let err = extract_apex_value(&probe, &u, &v, &log_space(20.0, 200.0, 6), &ExtractOptions::default());
        assert!(matches!(err, Err(Error::FlankMismatch { .. })));
    }

    #[test]
    fn gap_antisymmetry_and_rigid_motion() {
        let c = corner();
        let probe = CgoProbe::new(c.clone(), 1.0).unwrap();
        let v = PlaneWave { amplitude: C64::new(0.5, 0.0), k: 1.0, dir: Vec3::new(1.0, 0.0, 0.0) };
        let w = RadialBump { apex: c.apex, dim: 2, c: C64::new(-2.0, 0.0), kappa: C64::new(1.0, 0.0), alpha: 1.0 };
        let u = FieldDiff::sum(&v, &w);
        let opts = ExtractOptions { policy: FlankPolicy::IncludeFlanks, ..Default::default() };
        let taus = log_space(20.0, 200.0, 10);
        let a = extract_two_content_gap(&probe, &u, &v, &taus, &opts).unwrap();
        let b = extract_two_content_gap(&probe, &v, &u, &taus, &opts).unwrap();
        assert!((a.limit + b.limit).norm() < 1e-12);
        // f1 - f2 = -Delta w(apex) = 2
        assert!((a.limit - C64::new(2.0, 0.0)).norm() < 0.04);

        let (angle, shift) = (0.9, Vec2::new(0.4, -0.3));
        let moved = CgoProbe::new(c.rotated_2d(Vec2::new(0.0, 0.0), angle), 1.0).unwrap();
        let moved = CgoProbe { corner: TruncatedCorner { apex: (moved.corner.apex.xy() + shift).to_3d(), ..moved.corner.clone() }, ..moved };
        let su = ShiftedField { inner: &u, angle, shift };
        let sv = ShiftedField { inner: &v, angle, shift };
        let m = extract_two_content_gap(&moved, &su, &sv, &taus, &opts).unwrap();
        assert!((m.limit - a.limit).norm() < 1e-8);
    }
}
