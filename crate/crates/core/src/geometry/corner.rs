use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::polygon::ConvexPolygon;
use super::vector::{point_segment_distance, Vec2, Vec3};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "kind")]
pub enum CornerKind {
    Sector,
    CircularCone,
    /// Edge directions sorted by azimuth about the axis.
    PolyhedralCone { edges: Vec<Vec3> },
}

/// A strictly convex sector or cone intersected with the ball of radius `radius` about its apex.
///
/// Fields are public so that invalid corners can be built on purpose; every consumer
/// calls [`TruncatedCorner::validate`] before use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CornerSpec", into = "CornerSpec")]
pub struct TruncatedCorner {
    pub apex: Vec3,
    pub axis: Vec3,
    pub half_angle: f64,
    pub radius: f64,
    pub kind: CornerKind,
}

/// Serialized form; 2D corners use two-component vectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CornerSpec {
    pub apex: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_angle: Option<f64>,
    pub radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<Vec<f64>>>,
}

fn to_vec3(v: &[f64], what: &str) -> Result<Vec3> {
    match v {
        [x, y] => Ok(Vec3::new(*x, *y, 0.0)),
        [x, y, z] => Ok(Vec3::new(*x, *y, *z)),
        _ => Err(Error::Config(format!("{what} must have 2 or 3 components, got {}", v.len()))),
    }
}

impl TryFrom<CornerSpec> for TruncatedCorner {
    type Error = Error;
    fn try_from(s: CornerSpec) -> Result<Self> {
        if let Some(edges) = s.edges {
            let apex = to_vec3(&s.apex, "apex")?;
            let edges = edges.iter().map(|e| to_vec3(e, "edge")).collect::<Result<Vec<_>>>()?;
            return Self::polyhedral(apex, edges, s.radius);
        }
        let axis = s.axis.ok_or_else(|| Error::Config("corner needs `axis` or `edges`".into()))?;
        let half_angle = s
            .half_angle
            .ok_or_else(|| Error::Config("corner needs `halfAngle`".into()))?;
        match (s.apex.len(), axis.len()) {
            (2, 2) => Self::sector(
                Vec2::new(s.apex[0], s.apex[1]),
                Vec2::new(axis[0], axis[1]),
                half_angle,
                s.radius,
            ),
            (3, 3) => Self::circular_cone(
                to_vec3(&s.apex, "apex")?,
                to_vec3(&axis, "axis")?,
                half_angle,
                s.radius,
            ),
            (a, b) => Err(Error::Config(format!("apex/axis dimensions {a}/{b} disagree"))),
        }
    }
}

impl From<TruncatedCorner> for CornerSpec {
    fn from(c: TruncatedCorner) -> Self {
        let dim = c.dimension();
        let v = |p: Vec3| if dim == 2 { vec![p.x, p.y] } else { vec![p.x, p.y, p.z] };
        match &c.kind {
            CornerKind::PolyhedralCone { edges } => CornerSpec {
                apex: v(c.apex),
                axis: None,
                half_angle: None,
                radius: c.radius,
                edges: Some(edges.iter().map(|&e| v(e)).collect()),
            },
            _ => CornerSpec {
                apex: v(c.apex),
                axis: Some(v(c.axis)),
                half_angle: Some(c.half_angle),
                radius: c.radius,
                edges: None,
            },
        }
    }
}

impl TruncatedCorner {
    pub fn sector(apex: Vec2, axis: Vec2, half_angle: f64, radius: f64) -> Result<Self> {
        if !(axis.norm() > 0.0) {
            return Err(Error::Geometry("zero axis".into()));
        }
        let c = Self {
            apex: apex.to_3d(),
            axis: axis.normalized().to_3d(),
            half_angle,
            radius,
            kind: CornerKind::Sector,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn circular_cone(apex: Vec3, axis: Vec3, half_angle: f64, radius: f64) -> Result<Self> {
        if !(axis.norm() > 0.0) {
            return Err(Error::Geometry("zero axis".into()));
        }
        let c = Self {
            apex,
            axis: axis.normalized(),
            half_angle,
            radius,
            kind: CornerKind::CircularCone,
        };
        c.validate()?;
        Ok(c)
    }

    /// Polyhedral cone spanned by `edges`; axis and half-angle are those of a
    /// circumscribed circular cone (axis = normalized mean of the unit edges).
    pub fn polyhedral(apex: Vec3, edges: Vec<Vec3>, radius: f64) -> Result<Self> {
        if edges.len() < 3 {
            return Err(Error::Geometry(format!("polyhedral cone needs >= 3 edges, got {}", edges.len())));
        }
        if edges.iter().any(|e| !(e.norm() > 0.0)) {
            return Err(Error::Geometry("zero edge direction".into()));
        }
        let unit: Vec<Vec3> = edges.iter().map(|e| e.normalized()).collect();
        for i in 0..unit.len() {
            for j in i + 1..unit.len() {
                if unit[i].cross(unit[j]).norm() < 1e-12 {
                    return Err(Error::Geometry(format!("edges {i} and {j} are parallel")));
                }
            }
        }
        let sum = unit.iter().fold(Vec3::default(), |acc, &e| acc + e);
        if sum.norm() < 1e-12 {
            return Err(Error::NotStrictlyConvex { half_angle: FRAC_PI_2 });
        }
        let axis = sum.normalized();
        let half_angle = unit.iter().map(|e| e.angle_to(axis)).fold(0.0, f64::max);
        let u = axis.any_orthogonal();
        let w = axis.cross(u);
        let mut sorted = unit;
        sorted.sort_by(|a, b| a.dot(w).atan2(a.dot(u)).total_cmp(&b.dot(w).atan2(b.dot(u))));
        // Each consecutive pair must turn the same way about the axis (convex cone).
        let n = sorted.len();
        for i in 0..n {
            let a = sorted[i];
            let b = sorted[(i + 1) % n];
            if a.cross(b).dot(axis) <= 0.0 {
                return Err(Error::Geometry("polyhedral edges do not span a convex cone".into()));
            }
        }
        let c = Self {
            apex,
            axis,
            half_angle,
            radius,
            kind: CornerKind::PolyhedralCone { edges: sorted },
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_angle > 0.0) {
            return Err(Error::Geometry(format!("half-angle must be positive, got {}", self.half_angle)));
        }
        if self.half_angle >= FRAC_PI_2 {
            return Err(Error::NotStrictlyConvex { half_angle: self.half_angle });
        }
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(Error::Geometry(format!("radius must be positive, got {}", self.radius)));
        }
        if (self.axis.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Geometry("axis is not unit length".into()));
        }
        if self.dimension() == 2 && (self.axis.z != 0.0 || self.apex.z != 0.0) {
            return Err(Error::Geometry("sector must lie in the plane".into()));
        }
        if let CornerKind::PolyhedralCone { edges } = &self.kind {
            if edges.iter().any(|e| e.angle_to(self.axis) > self.half_angle + 1e-12) {
                return Err(Error::Geometry("edge outside the circumscribed cone".into()));
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        match self.kind {
            CornerKind::Sector => 2,
            _ => 3,
        }
    }

    /// Polar angle of the axis (2D only).
    pub fn axis_angle(&self) -> f64 {
        self.axis.y.atan2(self.axis.x)
    }

    /// Closed membership test.
    pub fn contains(&self, p: Vec3, tol: f64) -> bool {
        let r = p - self.apex;
        let dist = r.norm();
        if dist > self.radius + tol {
            return false;
        }
        if dist <= tol {
            return true;
        }
        match &self.kind {
            CornerKind::Sector | CornerKind::CircularCone => r.angle_to(self.axis) <= self.half_angle + tol / dist,
            CornerKind::PolyhedralCone { edges } => {
                let n = edges.len();
                (0..n).all(|i| edges[i].cross(edges[(i + 1) % n]).dot(r) >= -tol)
            }
        }
    }

    /// Measure of the truncated corner.
    pub fn volume(&self) -> Option<f64> {
        let h = self.radius;
        match self.kind {
            CornerKind::Sector => Some(self.half_angle * h * h),
            CornerKind::CircularCone => Some(2.0 * PI * (1.0 - self.half_angle.cos()) * h.powi(3) / 3.0),
            CornerKind::PolyhedralCone { .. } => None,
        }
    }

    /// Measure of the spherical lid (arc length in 2D, cap area in 3D).
    pub fn lid_measure(&self) -> Option<f64> {
        let h = self.radius;
        match self.kind {
            CornerKind::Sector => Some(2.0 * self.half_angle * h),
            CornerKind::CircularCone => Some(2.0 * PI * (1.0 - self.half_angle.cos()) * h * h),
            CornerKind::PolyhedralCone { .. } => None,
        }
    }

    /// Rigid motion `x -> R x + t` applied to a planar corner.
    pub fn rotated_2d(&self, center: Vec2, angle: f64) -> Self {
        let apex = center + (self.apex.xy() - center).rotate(angle);
        let axis = self.axis.xy().rotate(angle);
        Self { apex: apex.to_3d(), axis: axis.to_3d(), ..self.clone() }
    }
}

/// CGO direction pair and decay margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProbeDirection {
    pub d: Vec3,
    pub d_perp: Vec3,
    pub zeta: f64,
}

impl ProbeDirection {
    /// Minimum of `-d . x_hat` over `n` sampled ray directions of the corner.
    pub fn sampled_margin(&self, corner: &TruncatedCorner, n: usize) -> f64 {
        sample_rays(corner, n)
            .into_iter()
            .map(|x| -self.d.dot(x))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Ray directions covering the corner, including its boundary rays.
pub fn sample_rays(corner: &TruncatedCorner, n: usize) -> Vec<Vec3> {
    let n = n.max(2);
    match &corner.kind {
        CornerKind::Sector => {
            let phi = corner.axis_angle();
            let th = corner.half_angle;
            (0..n)
                .map(|k| {
                    let t = -th + 2.0 * th * k as f64 / (n - 1) as f64;
                    Vec2::from_angle(phi + t).to_3d()
                })
                .collect()
        }
        CornerKind::CircularCone => {
            let a = corner.axis;
            let u = a.any_orthogonal();
            let w = a.cross(u);
            let m = (n as f64).sqrt().ceil() as usize;
            let mut out = Vec::with_capacity(m * m);
            for i in 0..m {
                let polar = corner.half_angle * i as f64 / (m - 1).max(1) as f64;
                for j in 0..m {
                    let az = 2.0 * PI * j as f64 / m as f64;
                    let (sp, cp) = polar.sin_cos();
                    out.push(a * cp + (u * az.cos() + w * az.sin()) * sp);
                }
            }
            out
        }
        CornerKind::PolyhedralCone { edges } => {
            // Fan triangulation of the spherical polygon with barycentric sampling.
            let m = ((n as f64 / edges.len() as f64).sqrt().ceil() as usize).max(2);
            let mut out = Vec::new();
            let e0 = corner.axis;
            for i in 0..edges.len() {
                let e1 = edges[i];
                let e2 = edges[(i + 1) % edges.len()];
                for a in 0..=m {
                    for b in 0..=(m - a) {
                        let c = m - a - b;
                        let p = e0 * a as f64 + e1 * b as f64 + e2 * c as f64;
                        out.push(p.normalized());
                    }
                }
            }
            out
        }
    }
}

/// `d = -axis`, `d_perp` the +90 degree rotation of `d` in 2D, and `zeta = cos(theta0) - slack`.
pub fn choose_probe_direction(corner: &TruncatedCorner, slack: f64) -> Result<ProbeDirection> {
    corner.validate()?;
    let d = -corner.axis;
    let d_perp = match corner.kind {
        CornerKind::Sector => d.xy().perp().to_3d(),
        _ => d.any_orthogonal(),
    };
    let zeta = corner.half_angle.cos() - slack;
    if !(zeta > 0.0) {
        return Err(Error::Geometry(format!("slack {slack} leaves no positive margin")));
    }
    Ok(ProbeDirection { d, d_perp, zeta })
}

/// Largest `h` for which the disc about vertex `i` meets only the two adjacent edges.
pub fn max_corner_radius(poly: &ConvexPolygon, i: usize) -> f64 {
    let n = poly.len();
    let v = poly.vertex(i);
    (0..n)
        .filter(|&e| e != i % n && e != (i + n - 1) % n)
        .map(|e| {
            let (a, b) = poly.edge(e);
            point_segment_distance(v, a, b)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Truncated corner at vertex `i` of a convex polygon.
pub fn vertex_corner(poly: &ConvexPolygon, i: usize, h: f64) -> Result<TruncatedCorner> {
    let max = max_corner_radius(poly, i);
    if !(h > 0.0) || h >= max {
        return Err(Error::CornerRadiusTooLarge { requested: h, max });
    }
    let n = poly.len();
    let v = poly.vertex(i);
    let a = (poly.vertex(i + n - 1) - v).normalized();
    let b = (poly.vertex(i + 1) - v).normalized();
    let axis = (a + b).normalized();
    TruncatedCorner::sector(v, axis, 0.5 * poly.interior_angle(i), h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn square_corner_is_right_angle_bisector() {
        let c = vertex_corner(&ConvexPolygon::unit_square(), 0, 0.1).unwrap();
        assert!((c.axis.x - FRAC_PI_4.cos()).abs() < 1e-15);
        assert!((c.axis.y - FRAC_PI_4.sin()).abs() < 1e-15);
        assert!((c.half_angle - FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn oversized_radius_reports_max() {
        match vertex_corner(&ConvexPolygon::unit_square(), 0, 2.0) {
            Err(Error::CornerRadiusTooLarge { max, .. }) => assert!((max - 1.0).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn equilateral_half_angle() {
        let t = ConvexPolygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.5, 3f64.sqrt() / 2.0),
        ])
        .unwrap();
        for i in 0..3 {
            let c = vertex_corner(&t, i, 0.1).unwrap();
            assert!((c.half_angle - PI / 6.0).abs() < 1e-14);
        }
    }

    #[test]
    fn right_angle_is_rejected() {
        let mut c = TruncatedCorner::sector(Vec2::default(), Vec2::new(1.0, 0.0), 0.5, 1.0).unwrap();
        c.half_angle = FRAC_PI_2;
        assert!(matches!(choose_probe_direction(&c, 0.0), Err(Error::NotStrictlyConvex { .. })));
    }

    #[test]
    fn sector_direction_margin() {
        let c = TruncatedCorner::sector(Vec2::default(), Vec2::new(1.0, 0.0), FRAC_PI_4, 1.0).unwrap();
        let p = choose_probe_direction(&c, 0.0).unwrap();
        assert_eq!(p.d, Vec3::new(-1.0, 0.0, 0.0));
        assert!((p.zeta - FRAC_PI_4.cos()).abs() < 1e-15);
        let m = p.sampled_margin(&c, 10_000);
        assert!((m - p.zeta).abs() < 1e-12);
    }

    #[test]
    fn polyhedral_fits_in_circumscribed_cone() {
        let th = PI / 6.0;
        let edges: Vec<Vec3> = (0..3)
            .map(|k| {
                let az = 2.0 * PI * k as f64 / 3.0;
                Vec3::new(th.sin() * az.cos(), th.sin() * az.sin(), th.cos())
            })
            .collect();
        let c = TruncatedCorner::polyhedral(Vec3::default(), edges, 1.0).unwrap();
        assert!((c.axis.z - 1.0).abs() < 1e-12);
        let p = choose_probe_direction(&c, 0.0).unwrap();
        assert!(p.zeta >= th.cos() - 1e-12);
        assert!(p.sampled_margin(&c, 10_000) >= p.zeta - 1e-12);
    }

    #[test]
    fn corner_serde_round_trip() {
        let c = TruncatedCorner::sector(Vec2::new(0.2, 0.3), Vec2::new(0.0, 1.0), 0.4, 0.5).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains("halfAngle"));
        let back: TruncatedCorner = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        let bad = r#"{"apex":[0,0],"axis":[1,0],"halfAngle":1.6,"radius":1}"#;
        assert!(serde_json::from_str::<TruncatedCorner>(bad).is_err());
    }
}
