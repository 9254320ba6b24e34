use serde::{Deserialize, Serialize};

use super::fields::Field;
use crate::geometry::{CornerKind, TruncatedCorner, Vec3};
use crate::probes::{angular_integral, CgoProbe};
use crate::quadrature::{try_integrate, QuadOptions};
use crate::{Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum BoundaryPart {
    /// The spherical lid `|x - apex| = h`.
    Lid,
    /// The flat sides through the apex.
    Flanks,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GreenResidual {
    #[serde(with = "crate::serde_cx")]
    pub volume: C64,
    #[serde(with = "crate::serde_cx")]
    pub boundary: C64,
    pub residual: f64,
    pub relative: f64,
}

fn sub(opts: QuadOptions) -> QuadOptions {
    QuadOptions { rel_tol: opts.rel_tol * 0.1, abs_tol: opts.abs_tol * 0.1, ..opts }
}

/// `int_0^h f(r) dr`, split at the probe decay length.
fn radial<F: Fn(f64) -> Result<C64>>(f: F, h: f64, decay: f64, opts: QuadOptions) -> Result<C64> {
    let knee = (8.0 / decay).min(h);
    let mut v = try_integrate(&f, 0.0, knee, opts)?.value;
    if knee < h {
        v += try_integrate(&f, knee, h, opts)?.value;
    }
    Ok(v)
}

/// `int_{C_h} F u0 dx` for a pointwise volume integrand `F`.
pub fn volume_integral(probe: &CgoProbe, f: &(dyn Fn(Vec3) -> Result<C64> + Sync), opts: QuadOptions) -> Result<C64> {
    let c = &probe.corner;
    c.validate()?;
    let p = c.dimension() as i32 - 1;
    let decay = probe.tau * probe.direction.zeta;
    let inner = sub(opts);
    angular_integral(
        c,
        |xh| {
            radial(
                |r| {
                    let x = c.apex + xh * r;
                    Ok(f(x)? * probe.eval(x)? * r.powi(p))
                },
                c.radius,
                decay,
                inner,
            )
        },
        opts,
    )
}

/// Flat sides as `(first ray, in-plane unit vector toward the second, opening angle, outward normal)`.
fn flank_faces(c: &TruncatedCorner) -> Vec<(Vec3, Vec3, f64, Vec3)> {
    match &c.kind {
        CornerKind::PolyhedralCone { edges } => {
            let n = edges.len();
            (0..n)
                .map(|k| {
                    let (a, b) = (edges[k], edges[(k + 1) % n]);
                    let q = (b - a * a.dot(b)).normalized();
                    (a, q, a.angle_to(b), -a.cross(b).normalized())
                })
                .collect()
        }
        _ => Vec::new(),
    }
}

fn integrand<'a>(
    probe: &'a CgoProbe,
    u: &'a dyn Field,
    v: &'a dyn Field,
) -> impl Fn(Vec3, Vec3) -> Result<C64> + 'a {
    move |x, n| {
        let u0 = probe.eval(x)?;
        let g0 = probe.gradient(x)?;
        let dn0 = g0[0] * n.x + g0[1] * n.y + g0[2] * n.z;
        let w = u.value(x)? - v.value(x)?;
        let dnw = u.normal_derivative(x, n)? - v.normal_derivative(x, n)?;
        Ok(u0 * dnw - w * dn0)
    }
}

/// `int u0 d_nu(u - v) - (u - v) d_nu u0` over part of the corner boundary (outward normal).
pub fn boundary_integral(
    probe: &CgoProbe,
    u: &dyn Field,
    v: &dyn Field,
    part: BoundaryPart,
    opts: QuadOptions,
) -> Result<C64> {
    let c = &probe.corner;
    c.validate()?;
    let g = integrand(probe, u, v);
    let h = c.radius;
    let mut total = C64::new(0.0, 0.0);
    if matches!(part, BoundaryPart::Lid | BoundaryPart::All) {
        let jac = h.powi(c.dimension() as i32 - 1);
        total += angular_integral(c, |xh| g(c.apex + xh * h, xh), opts)? * jac;
    }
    if matches!(part, BoundaryPart::Flanks | BoundaryPart::All) {
        total += flank_integral(probe, &g, opts)?;
    }
    Ok(total)
}

fn flank_integral(probe: &CgoProbe, g: &dyn Fn(Vec3, Vec3) -> Result<C64>, opts: QuadOptions) -> Result<C64> {
    let c = &probe.corner;
    let h = c.radius;
    let decay = probe.tau * probe.direction.zeta;
    let inner = sub(opts);
    match &c.kind {
        CornerKind::Sector => {
            let axis = c.axis.xy();
            let mut total = C64::new(0.0, 0.0);
            for s in [1.0, -1.0] {
                let e = axis.rotate(s * c.half_angle);
                let n = (e.perp() * s).to_3d();
                let e = e.to_3d();
                total += radial(|r| g(c.apex + e * r, n), h, decay, opts)?;
            }
            Ok(total)
        }
        CornerKind::CircularCone => {
            let a = c.axis;
            let e1 = a.any_orthogonal();
            let e2 = a.cross(e1);
            let (st, ct) = c.half_angle.sin_cos();
            Ok(try_integrate(
                |om| {
                    let w = e1 * om.cos() + e2 * om.sin();
                    let ray = a * ct + w * st;
                    let n = w * ct - a * st;
                    radial(|r| Ok(g(c.apex + ray * r, n)? * (r * st)), h, decay, inner)
                },
                0.0,
                2.0 * std::f64::consts::PI,
                opts,
            )?
            .value)
        }
        CornerKind::PolyhedralCone { .. } => {
            let mut total = C64::new(0.0, 0.0);
            for (e, q, beta, n) in flank_faces(c) {
                total += try_integrate(
                    |t| {
                        let ray = e * t.cos() + q * t.sin();
                        radial(|r| Ok(g(c.apex + ray * r, n)? * r), h, decay, inner)
                    },
                    0.0,
                    beta,
                    opts,
                )?
                .value;
            }
            Ok(total)
        }
    }
}

/// Largest relative Cauchy mismatch `|u - v| + h |d_nu (u - v)|` over sampled flank points,
/// normalized by the same expression for `u` alone.
pub fn flank_mismatch(corner: &TruncatedCorner, u: &dyn Field, v: &dyn Field, samples: usize) -> Result<f64> {
    let h = corner.radius;
    let mut pts: Vec<(Vec3, Vec3)> = Vec::new();
    let radii: Vec<f64> = (1..=samples).map(|k| h * k as f64 / samples as f64).collect();
    match &corner.kind {
        CornerKind::Sector => {
            let axis = corner.axis.xy();
            for s in [1.0, -1.0] {
                let e = axis.rotate(s * corner.half_angle);
                let n = (e.perp() * s).to_3d();
                pts.extend(radii.iter().map(|&r| (corner.apex + e.to_3d() * r, n)));
            }
        }
        CornerKind::CircularCone => {
            let a = corner.axis;
            let e1 = a.any_orthogonal();
            let e2 = a.cross(e1);
            let (st, ct) = corner.half_angle.sin_cos();
            for k in 0..samples {
                let om = 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
                let w = e1 * om.cos() + e2 * om.sin();
                let ray = a * ct + w * st;
                pts.extend(radii.iter().map(|&r| (corner.apex + ray * r, w * ct - a * st)));
            }
        }
        CornerKind::PolyhedralCone { .. } => {
            for (e, q, beta, n) in flank_faces(corner) {
                for k in 0..samples {
                    let t = beta * (k as f64 + 0.5) / samples as f64;
                    let ray = e * t.cos() + q * t.sin();
                    pts.extend(radii.iter().map(|&r| (corner.apex + ray * r, n)));
                }
            }
        }
    }
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (x, n) in pts {
        let du = u.value(x)? - v.value(x)?;
        let dn = u.normal_derivative(x, n)? - v.normal_derivative(x, n)?;
        diff = diff.max(du.norm() + h * dn.norm());
        scale = scale.max(u.value(x)?.norm() + h * u.normal_derivative(x, n)?.norm());
    }
    Ok(if diff == 0.0 { 0.0 } else { diff / scale.max(f64::MIN_POSITIVE) })
}

/// Both sides of `int_{C_h} F u0 = int_{dC_h} u0 d_nu(u - v) - (u - v) d_nu u0`.
pub fn green_identity_residual(
    probe: &CgoProbe,
    u: &dyn Field,
    v: &dyn Field,
    f: &(dyn Fn(Vec3) -> Result<C64> + Sync),
    opts: QuadOptions,
) -> Result<GreenResidual> {
    let volume = volume_integral(probe, f, opts)?;
    let boundary = boundary_integral(probe, u, v, BoundaryPart::All, opts)?;
    let residual = (volume - boundary).norm();
    let scale = volume.norm().max(boundary.norm());
    Ok(GreenResidual {
        volume,
        boundary,
        residual,
        relative: if residual == 0.0 { 0.0 } else { residual / scale },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;
    use crate::indicator::{FieldDiff, PlaneWave, RadialBump};
    use std::f64::consts::PI;

    #[test]
    fn plane_wave_pair_gives_zero() {
        let c = TruncatedCorner::sector(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), PI / 4.0, 1.0).unwrap();
        let probe = CgoProbe::new(c, 30.0).unwrap();
        let v = PlaneWave { amplitude: C64::new(1.0, 0.0), k: 2.0, dir: Vec3::new(0.6, 0.8, 0.0) };
        let r = green_identity_residual(&probe, &v, &v, &|_| Ok(C64::new(0.0, 0.0)), QuadOptions::rel(1e-10)).unwrap();
        assert!(r.volume.norm() < 1e-10 && r.boundary.norm() < 1e-10);
    }

    #[test]
    fn manufactured_pairs_in_2d_and_3d() {
        let opts = QuadOptions::rel(1e-10);
        let c2 = TruncatedCorner::sector(Vec2::new(0.2, 0.1), Vec2::new(0.0, 1.0), 0.7, 0.8).unwrap();
        let th = PI / 6.0;
        let c3 = TruncatedCorner::circular_cone(Vec3::default(), Vec3::new(0.0, 0.0, 1.0), th, 1.0).unwrap();
        let edges: Vec<Vec3> = (0..3)
            .map(|k| {
                let az = 2.0 * PI * k as f64 / 3.0;
                Vec3::new(th.sin() * az.cos(), th.sin() * az.sin(), th.cos())
            })
            .collect();
        let c4 = TruncatedCorner::polyhedral(Vec3::default(), edges, 1.0).unwrap();
        for (corner, k) in [(c2, 1.5), (c3, 0.8), (c4, 0.8)] {
            let dim = corner.dimension();
            let v = PlaneWave { amplitude: C64::new(1.0, 0.0), k, dir: Vec3::new(0.0, 0.6, 0.8) };
            let w = RadialBump { apex: corner.apex, dim, c: C64::new(1.0, 0.5), kappa: C64::new(2.0, 0.0), alpha: 0.7 };
            let u = FieldDiff::sum(&v, &w);
            let probe = CgoProbe::new(corner, 6.0).unwrap();
            let f = |x: Vec3| Ok(w.laplacian(x));
            let r = green_identity_residual(&probe, &u, &v, &f, opts).unwrap();
            assert!(r.relative < 1e-8, "dim {dim}: {r:?}");
        }
    }
}
