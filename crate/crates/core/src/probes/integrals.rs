use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::{angular_integral, CgoProbe};
use crate::geometry::{CornerKind, TruncatedCorner, Vec3};
use crate::quadrature::{try_integrate, QuadOptions};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum IntegralMethod {
    ClosedForm2D,
    Quadrature,
}

/// `int_0^inf r^p exp(-mu r) dr = Gamma(p + 1) / mu^(p + 1)` for `Re mu > 0`.
pub fn laplace_moment(p: f64, mu: C64) -> C64 {
    C64::new(gamma(p + 1.0), 0.0) / mu.powf(p + 1.0)
}

fn radial(p: f64, mu: C64, h: f64, opts: QuadOptions) -> Result<C64> {
    if mu.re <= 0.0 {
        return Err(Error::Overflow(-mu.re * h));
    }
    // Split at the decay length so the adaptive rule starts on the right scale.
    let knee = (8.0 / mu.re).min(h);
    let f = |r: f64| Ok(if r == 0.0 { C64::new(0.0, 0.0) } else { (-mu * r).exp() * r.powf(p) });
    let mut v = try_integrate(f, 0.0, knee, opts)?.value;
    if knee < h {
        v += try_integrate(f, knee, h, opts)?.value;
    }
    Ok(v)
}

fn inner(opts: QuadOptions) -> QuadOptions {
    QuadOptions { rel_tol: opts.rel_tol * 0.01, abs_tol: opts.abs_tol * 0.01, ..opts }
}

/// `int_{C_h} |x - apex|^alpha u0 dx` by nested adaptive quadrature over directions and radius.
pub fn weighted_corner_integral(probe: &CgoProbe, alpha: f64, opts: QuadOptions) -> Result<C64> {
    if !(alpha >= 0.0) {
        return Err(Error::Config(format!("weight exponent must be nonnegative, got {alpha}")));
    }
    probe.corner.validate()?;
    let p = alpha + probe.corner.dimension() as f64 - 1.0;
    let h = probe.corner.radius;
    let ropts = inner(opts);
    angular_integral(&probe.corner, |x| radial(p, probe.mu(x), h, ropts), opts)
}

/// `int_{C_h} u0 dx`.
pub fn corner_integral(probe: &CgoProbe, method: IntegralMethod, opts: QuadOptions) -> Result<C64> {
    match method {
        IntegralMethod::Quadrature => weighted_corner_integral(probe, 0.0, opts),
        IntegralMethod::ClosedForm2D => corner_integral_closed_form_2d(probe, opts),
    }
}

/// Infinite-sector value `tau^-2 int exp(-2i(theta - phi_d)) d theta` in closed form.
pub fn infinite_sector_2d(probe: &CgoProbe) -> Result<C64> {
    let c = &probe.corner;
    if c.kind != CornerKind::Sector {
        return Err(Error::Geometry("closed form applies to planar sectors only".into()));
    }
    c.validate()?;
    let phi_d = probe.direction.d.y.atan2(probe.direction.d.x);
    let (lo, hi) = (c.axis_angle() - c.half_angle, c.axis_angle() + c.half_angle);
    let prim = |t: f64| C64::new(0.0, -2.0 * (t - phi_d)).exp() / C64::new(0.0, -2.0);
    // Requires d_perp to be the +90 degree rotation of d.
    let rot = probe.direction.d.xy().perp();
    if (rot - probe.direction.d_perp.xy()).norm() > 1e-12 {
        return Err(Error::Geometry("closed form needs d_perp = +90 degree rotation of d".into()));
    }
    Ok((prim(hi) - prim(lo)) / (probe.tau * probe.tau))
}

/// Closed-form infinite sector minus the tail beyond `r = h`, the tail by quadrature in angle.
pub fn corner_integral_closed_form_2d(probe: &CgoProbe, opts: QuadOptions) -> Result<C64> {
    let full = infinite_sector_2d(probe)?;
    let h = probe.corner.radius;
    // int_h^inf r exp(-mu r) dr = exp(-mu h) (h / mu + 1 / mu^2)
    let tail = angular_integral(
        &probe.corner,
        |x| {
            let mu = probe.mu(x);
            Ok((-mu * h).exp() * (mu.inv() * h + (mu * mu).inv()))
        },
        QuadOptions { abs_tol: opts.rel_tol * full.norm(), ..opts },
    )?;
    Ok(full - tail)
}

/// Angular measure of the corner's set of directions.
pub fn angular_measure(corner: &TruncatedCorner) -> Result<f64> {
    match corner.kind {
        CornerKind::Sector => Ok(2.0 * corner.half_angle),
        CornerKind::CircularCone => Ok(2.0 * std::f64::consts::PI * (1.0 - corner.half_angle.cos())),
        CornerKind::PolyhedralCone { .. } => {
            Ok(angular_integral(corner, |_| Ok(C64::new(1.0, 0.0)), QuadOptions::rel(1e-10))?.re)
        }
    }
}

/// Leading magnitude `Gamma(alpha + n) |S| / tau^(alpha + n)` with `|S|` the angular measure.
pub fn leading_term(corner: &TruncatedCorner, tau: f64, alpha: f64) -> Result<f64> {
    let n = corner.dimension() as f64;
    Ok(gamma(alpha + n) * angular_measure(corner)? / tau.powf(alpha + n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LidNorms {
    pub tau: f64,
    pub lid_measure: f64,
    /// `||u0||_{L2(lid)}`.
    pub l2: f64,
    /// `(||u0||^2 + ||grad u0||^2)^(1/2)` on the lid.
    pub h1: f64,
    /// `||d_nu u0||_{L2(lid)}`.
    pub dnu: f64,
    /// `(2 tau^2 + 1)^(1/2) exp(-zeta h tau) |lid|^(1/2)`.
    pub h1_bound: f64,
    /// `sqrt(2) tau exp(-zeta h tau) |lid|^(1/2)`.
    pub dnu_bound: f64,
}

/// Norms of `u0` and its normal derivative on the spherical lid `dC_h` intersected with `dB_h`.
pub fn lid_norms(probe: &CgoProbe, opts: QuadOptions) -> Result<LidNorms> {
    let c = &probe.corner;
    c.validate()?;
    let h = c.radius;
    let jac = h.powi(c.dimension() as i32 - 1);
    let lid_measure = angular_measure(c)? * jac;
    let tau = probe.tau;
    let apex = c.apex;
    let vals = |x: Vec3| -> Result<(f64, f64)> {
        let u = probe.eval(apex + x * h)?;
        let g = probe.gradient(apex + x * h)?;
        let dn = g[0] * x.x + g[1] * x.y + g[2] * x.z;
        Ok((u.norm_sqr(), dn.norm_sqr()))
    };
    let l2sq = angular_integral(c, |x| Ok(C64::new(vals(x)?.0, 0.0)), opts)?.re * jac;
    let dnsq = angular_integral(c, |x| Ok(C64::new(vals(x)?.1, 0.0)), opts)?.re * jac;
    // |grad u0| = sqrt(2) tau |u0| exactly.
    let h1 = (l2sq * (1.0 + 2.0 * tau * tau)).sqrt();
    let decay = (-probe.direction.zeta * h * tau).exp() * lid_measure.sqrt();
    Ok(LidNorms {
        tau,
        lid_measure,
        l2: l2sq.sqrt(),
        h1,
        dnu: dnsq.sqrt(),
        h1_bound: (2.0 * tau * tau + 1.0).sqrt() * decay,
        dnu_bound: 2f64.sqrt() * tau * decay,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;
    use crate::quadrature::integrate_semi_infinite;
    use std::f64::consts::PI;

    fn sector(tau: f64) -> CgoProbe {
        let c = TruncatedCorner::sector(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), PI / 4.0, 1.0).unwrap();
        CgoProbe::new(c, tau).unwrap()
    }

    #[test]
    fn laplace_identity_by_quadrature() {
        for (p, mu) in [(1.0, 3.0), (1.5, 0.7), (2.0, 5.0), (0.5, 1.3)] {
            let q = integrate_semi_infinite(|r| C64::new(r.powf(p) * (-mu * r).exp(), 0.0), 0.0, QuadOptions::rel(1e-12))
                .unwrap()
                .value;
            let exact = laplace_moment(p, C64::new(mu, 0.0));
            assert!(((q - exact) / exact).norm() < 1e-8, "p={p} mu={mu}");
        }
    }

    #[test]
    fn closed_form_agrees_with_quadrature() {
        for tau in [5.0, 50.0, 200.0] {
            let p = sector(tau);
            let cf = corner_integral(&p, IntegralMethod::ClosedForm2D, QuadOptions::rel(1e-12)).unwrap();
            let q = corner_integral(&p, IntegralMethod::Quadrature, QuadOptions::rel(1e-11)).unwrap();
            assert!(((cf - q) / q).norm() < 1e-9, "tau={tau}: {cf} vs {q}");
        }
    }

    #[test]
    fn infinite_sector_for_right_angle() {
        // sin(2 theta0) / tau^2 = 1 / tau^2
        let v = infinite_sector_2d(&sector(10.0)).unwrap();
        assert!((v - C64::new(0.01, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rotation_invariance() {
        let p = sector(40.0);
        let c = p.corner.rotated_2d(Vec2::new(0.3, 0.1), 1.1);
        let q = CgoProbe::new(c, 40.0).unwrap();
        let opts = QuadOptions::rel(1e-12);
        for (a, b) in [
            (corner_integral(&p, IntegralMethod::Quadrature, opts).unwrap(), corner_integral(&q, IntegralMethod::Quadrature, opts).unwrap()),
            (weighted_corner_integral(&p, 0.5, opts).unwrap(), weighted_corner_integral(&q, 0.5, opts).unwrap()),
        ] {
            assert!(((a - b) / a).norm() < 1e-10);
        }
    }

    #[test]
    fn lid_bounds_hold() {
        for tau in [20.0, 80.0, 200.0] {
            let n = lid_norms(&sector(tau), QuadOptions::rel(1e-10)).unwrap();
            assert!(n.h1 <= n.h1_bound && n.dnu <= n.dnu_bound);
            assert!(n.l2 <= (-(PI / 4.0).cos() * tau).exp() * (PI / 2.0).sqrt());
            // In 2D |d_nu u0| = tau |u0| on the lid.
            assert!((n.dnu - tau * n.l2).abs() <= 1e-9 * n.dnu);
        }
    }
}
