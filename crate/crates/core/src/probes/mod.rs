//! Harmonic complex exponentials `u0 = exp(tau (d + i d_perp) . (x - apex))` on truncated corners.

mod integrals;
mod sweep;

use serde::{Deserialize, Serialize};

use crate::geometry::{choose_probe_direction, CornerKind, ProbeDirection, TruncatedCorner, Vec3};
use crate::quadrature::{try_integrate, QuadOptions};
use crate::{Error, Result, C64};

pub use integrals::{
    angular_measure, corner_integral, corner_integral_closed_form_2d, infinite_sector_2d, laplace_moment, leading_term,
    lid_norms, weighted_corner_integral, IntegralMethod, LidNorms,
};
pub use sweep::{tau_sweep, Quantity, SweepRow, TauSweep};

/// Default cap on the real part of the exponent.
pub const OVERFLOW_CAP: f64 = 700.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CgoProbe {
    pub corner: TruncatedCorner,
    pub direction: ProbeDirection,
    pub tau: f64,
    pub cap: f64,
}

impl CgoProbe {
    /// Probe with `d = -axis` and no margin slack.
    pub fn new(corner: TruncatedCorner, tau: f64) -> Result<Self> {
        let direction = choose_probe_direction(&corner, 0.0)?;
        Self::with_direction(corner, direction, tau)
    }

    pub fn with_direction(corner: TruncatedCorner, direction: ProbeDirection, tau: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::Config(format!("tau must be positive, got {tau}")));
        }
        Ok(Self { corner, direction, tau, cap: OVERFLOW_CAP })
    }

    pub fn at_tau(&self, tau: f64) -> Self {
        Self { tau, ..self.clone() }
    }

    /// `|d|^2 - |d_perp|^2` and `d . d_perp`; both vanish, which makes `u0` harmonic.
    pub fn harmonicity_defect(&self) -> (f64, f64) {
        let (d, p) = (self.direction.d, self.direction.d_perp);
        (d.dot(d) - p.dot(p), d.dot(p))
    }

    fn exponent(&self, x: Vec3) -> C64 {
        let r = x - self.corner.apex;
        C64::new(self.direction.d.dot(r), self.direction.d_perp.dot(r)) * self.tau
    }

    pub fn eval(&self, x: Vec3) -> Result<C64> {
        let z = self.exponent(x);
        if z.re > self.cap {
            return Err(Error::Overflow(z.re));
        }
        Ok(z.exp())
    }

    /// `grad u0 = tau (d + i d_perp) u0`, returned componentwise.
    pub fn gradient(&self, x: Vec3) -> Result<[C64; 3]> {
        let u = self.eval(x)? * self.tau;
        let (d, p) = (self.direction.d, self.direction.d_perp);
        Ok([C64::new(d.x, p.x) * u, C64::new(d.y, p.y) * u, C64::new(d.z, p.z) * u])
    }

    /// `mu(x_hat)` with `u0(apex + r x_hat) = exp(-mu r)`.
    pub fn mu(&self, xhat: Vec3) -> C64 {
        -C64::new(self.direction.d.dot(xhat), self.direction.d_perp.dot(xhat)) * self.tau
    }
}

/// Integral of `g(x_hat)` over the corner's set of directions (arc in 2D, spherical region in 3D).
pub fn angular_integral<G>(corner: &TruncatedCorner, g: G, opts: QuadOptions) -> Result<C64>
where
    G: Fn(Vec3) -> Result<C64>,
{
    let inner = QuadOptions { rel_tol: opts.rel_tol * 0.1, abs_tol: opts.abs_tol * 0.1, ..opts };
    match &corner.kind {
        CornerKind::Sector => {
            let phi = corner.axis_angle();
            let th = corner.half_angle;
            let v = try_integrate(
                |t| g(Vec3::new((phi + t).cos(), (phi + t).sin(), 0.0)),
                -th,
                th,
                opts,
            )?;
            Ok(v.value)
        }
        CornerKind::CircularCone | CornerKind::PolyhedralCone { .. } => {
            let a = corner.axis;
            let e1 = a.any_orthogonal();
            let e2 = a.cross(e1);
            let dir = |polar: f64, az: f64| {
                a * polar.cos() + (e1 * az.cos() + e2 * az.sin()) * polar.sin()
            };
            let (breaks, faces) = match &corner.kind {
                CornerKind::PolyhedralCone { edges } => {
                    let n = edges.len();
                    let mut b: Vec<f64> = edges.iter().map(|e| e.dot(e2).atan2(e.dot(e1))).collect();
                    b.sort_by(f64::total_cmp);
                    let b0 = b[0];
                    b.push(b0 + 2.0 * std::f64::consts::PI);
                    let faces: Vec<Vec3> = (0..n).map(|k| edges[k].cross(edges[(k + 1) % n])).collect();
                    (b, faces)
                }
                _ => (vec![0.0, 2.0 * std::f64::consts::PI], Vec::new()),
            };
            let half = corner.half_angle;
            let polar_max = |az: f64| -> f64 {
                if faces.is_empty() {
                    return half;
                }
                let w = e1 * az.cos() + e2 * az.sin();
                faces
                    .iter()
                    .filter(|n| n.dot(w) < 0.0)
                    .map(|n| n.dot(a).atan2(-n.dot(w)))
                    .fold(half, f64::min)
            };
            let mut total = C64::new(0.0, 0.0);
            for w in breaks.windows(2) {
                total += try_integrate(
                    |az| {
                        Ok(try_integrate(|p| Ok(g(dir(p, az))? * p.sin()), 0.0, polar_max(az), inner)?.value)
                    },
                    w[0],
                    w[1],
                    opts,
                )?
                .value;
            }
            Ok(total)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;
    use std::f64::consts::PI;

    fn sector() -> TruncatedCorner {
        TruncatedCorner::sector(Vec2::new(0.3, -0.2), Vec2::new(1.0, 0.5), PI / 4.0, 1.0).unwrap()
    }

    #[test]
    fn apex_value_and_axis_decay() {
        let p = CgoProbe::new(sector(), 30.0).unwrap();
        assert_eq!(p.eval(p.corner.apex).unwrap(), C64::new(1.0, 0.0));
        let r = 0.37;
        let x = p.corner.apex + p.corner.axis * r;
        let expected = (-30.0 * r).exp();
        // On the axis d . x_hat = -1.
        assert!((p.eval(x).unwrap().norm() - expected).abs() < 1e-15);
        let (a, b) = p.harmonicity_defect();
        assert!(a.abs() < 1e-15 && b.abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let p = CgoProbe::new(sector(), 12.0).unwrap();
        let mut seed = 7u64;
        let mut rnd = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let x = Vec3::new(rnd() - 0.5, rnd() - 0.5, 0.0);
            let g = p.gradient(x).unwrap();
            let step = 1e-5;
            for (k, e) in [Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)].into_iter().enumerate() {
                let fd = (p.eval(x + e * step).unwrap() - p.eval(x - e * step).unwrap()) / (2.0 * step);
                assert!((fd - g[k]).norm() <= 1e-6 * g[k].norm().max(1e-300));
            }
        }
    }

    #[test]
    fn five_point_laplacian_is_small() {
        let p = CgoProbe::new(sector(), 20.0).unwrap();
        let s = 1e-4;
        for x in [Vec3::new(0.4, 0.0, 0.0), Vec3::new(0.5, 0.1, 0.0), Vec3::new(0.2, -0.3, 0.0)] {
            let u = |dx: f64, dy: f64| p.eval(x + Vec3::new(dx, dy, 0.0)).unwrap();
            let lap = (u(s, 0.0) + u(-s, 0.0) + u(0.0, s) + u(0.0, -s) - u(0.0, 0.0) * 4.0) / (s * s);
            assert!(lap.norm() < 1e-4 * 400.0 * u(0.0, 0.0).norm());
        }
    }

    #[test]
    fn overflow_guard() {
        let p = CgoProbe::new(sector(), 1000.0).unwrap();
        let behind = p.corner.apex - p.corner.axis * 1.0;
        assert!(matches!(p.eval(behind), Err(Error::Overflow(_))));
    }

    #[test]
    fn angular_measures() {
        let opts = QuadOptions::rel(1e-12);
        let one = |_| Ok(C64::new(1.0, 0.0));
        let s = angular_integral(&sector(), one, opts).unwrap();
        assert!((s.re - PI / 2.0).abs() < 1e-12);
        let th = PI / 6.0;
        let cone = TruncatedCorner::circular_cone(Vec3::default(), Vec3::new(0.0, 0.0, 1.0), th, 1.0).unwrap();
        let c = angular_integral(&cone, one, opts).unwrap();
        assert!((c.re - 2.0 * PI * (1.0 - th.cos())).abs() < 1e-11);
        // Square pyramid with apex half-diagonal angle th: solid angle 4 asin(sin^2(a)) with tan a = tan(th)/sqrt 2.
        let edges: Vec<Vec3> = (0..4)
            .map(|k| {
                let az = PI / 2.0 * k as f64;
                Vec3::new(th.sin() * az.cos(), th.sin() * az.sin(), th.cos())
            })
            .collect();
        let pyr = TruncatedCorner::polyhedral(Vec3::default(), edges, 1.0).unwrap();
        let a = (th.tan() / 2f64.sqrt()).atan();
        let exact = 4.0 * (a.sin() * a.sin()).asin();
        let v = angular_integral(&pyr, one, opts).unwrap();
        assert!((v.re - exact).abs() < 1e-9, "{} vs {exact}", v.re);
    }
}
