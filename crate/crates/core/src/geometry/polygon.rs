use serde::{Deserialize, Serialize};

use super::vector::{point_segment_distance, Vec2};
use crate::{Error, Result};

/// Relative tolerance for the strict-convexity turn test.
const TURN_TOL: f64 = 1e-12;

/// Strictly convex polygon with counterclockwise vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec2>", into = "Vec<Vec2>")]
pub struct ConvexPolygon {
    vertices: Vec<Vec2>,
}

impl TryFrom<Vec<Vec2>> for ConvexPolygon {
    type Error = Error;
    fn try_from(v: Vec<Vec2>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ConvexPolygon> for Vec<Vec2> {
    fn from(p: ConvexPolygon) -> Self {
        p.vertices
    }
}

impl ConvexPolygon {
    pub fn new(vertices: Vec<Vec2>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::Geometry(format!("polygon needs at least 3 vertices, got {n}")));
        }
        if vertices.iter().any(|v| !v.x.is_finite() || !v.y.is_finite()) {
            return Err(Error::Geometry("non-finite vertex coordinate".into()));
        }
        let scale = vertices
            .iter()
            .map(|v| v.x.abs().max(v.y.abs()))
            .fold(1e-300, f64::max);
        let mut winding = 0.0;
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            let turn = (b - a).cross(c - b);
            if turn <= TURN_TOL * scale * scale {
                return Err(Error::Geometry(format!(
                    "polygon is not strictly convex and counterclockwise at vertex {}",
                    (i + 1) % n
                )));
            }
            winding += (b - a).angle_to_signed(c - b);
        }
        if (winding - std::f64::consts::TAU).abs() > 1e-6 {
            return Err(Error::Geometry("polygon is not simple (winds more than once)".into()));
        }
        Ok(Self { vertices })
    }

    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Self::new(vec![
            Vec2::new(x0, y0),
            Vec2::new(x1, y0),
            Vec2::new(x1, y1),
            Vec2::new(x0, y1),
        ])
    }

    pub fn unit_square() -> Self {
        Self::rectangle(0.0, 0.0, 1.0, 1.0).expect("unit square is convex")
    }

    /// Regular polygon inscribed in a circle.
    pub fn regular(center: Vec2, radius: f64, sides: usize, phase: f64) -> Result<Self> {
        let verts = (0..sides)
            .map(|k| {
                center + Vec2::from_angle(phase + std::f64::consts::TAU * k as f64 / sides as f64) * radius
            })
            .collect();
        Self::new(verts)
    }

    /// Convex hull (Andrew's monotone chain), dropping collinear points.
    pub fn convex_hull(points: &[Vec2]) -> Result<Self> {
        let mut pts: Vec<Vec2> = points.to_vec();
        pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        pts.dedup();
        if pts.len() < 3 {
            return Err(Error::Geometry("hull of fewer than 3 distinct points".into()));
        }
        let mut lower: Vec<Vec2> = Vec::new();
        for &p in &pts {
            while lower.len() >= 2 && (lower[lower.len() - 1] - lower[lower.len() - 2]).cross(p - lower[lower.len() - 1]) <= 0.0 {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<Vec2> = Vec::new();
        for &p in pts.iter().rev() {
            while upper.len() >= 2 && (upper[upper.len() - 1] - upper[upper.len() - 2]).cross(p - upper[upper.len() - 1]) <= 0.0 {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        Self::new(lower)
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, i: usize) -> Vec2 {
        self.vertices[i % self.vertices.len()]
    }

    /// Edge `i` runs from vertex `i` to vertex `i + 1`.
    pub fn edge(&self, i: usize) -> (Vec2, Vec2) {
        (self.vertex(i), self.vertex(i + 1))
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        (0..self.len()).map(move |i| self.edge(i))
    }

    /// Outward unit normal of edge `i`.
    pub fn edge_normal(&self, i: usize) -> Vec2 {
        let (a, b) = self.edge(i);
        let t = (b - a).normalized();
        Vec2::new(t.y, -t.x)
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.dist(b)).sum()
    }

    pub fn area(&self) -> f64 {
        0.5 * self.edges().map(|(a, b)| a.cross(b)).sum::<f64>()
    }

    pub fn centroid(&self) -> Vec2 {
        let a = self.area();
        let mut c = Vec2::default();
        for (p, q) in self.edges() {
            let w = p.cross(q);
            c += (p + q) * w;
        }
        c * (1.0 / (6.0 * a))
    }

    /// Interior angle at vertex `i`.
    pub fn interior_angle(&self, i: usize) -> f64 {
        let n = self.len();
        let v = self.vertex(i);
        let prev = self.vertex(i + n - 1);
        let next = self.vertex(i + 1);
        (prev - v).to_3d().angle_to((next - v).to_3d())
    }

    /// Signed distance-like test: minimum over edges of the inward offset of `p`.
    /// Positive inside, zero on the boundary, negative outside.
    pub fn inward_margin(&self, p: Vec2) -> f64 {
        (0..self.len())
            .map(|i| {
                let (a, _) = self.edge(i);
                -(p - a).dot(self.edge_normal(i))
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        self.inward_margin(p) > 0.0
    }

    pub fn contains_closed(&self, p: Vec2, tol: f64) -> bool {
        self.inward_margin(p) >= -tol
    }

    pub fn boundary_distance(&self, p: Vec2) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = Vec2::new(lo.x.min(v.x), lo.y.min(v.y));
            hi = Vec2::new(hi.x.max(v.x), hi.y.max(v.y));
        }
        (lo, hi)
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for a in &self.vertices {
            for b in &self.vertices {
                d = d.max(a.dist(*b));
            }
        }
        d
    }

    /// Homothety about the centroid.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let c = self.centroid();
        Self::new(self.vertices.iter().map(|&v| c + (v - c) * factor).collect())
    }

    pub fn translated(&self, by: Vec2) -> Self {
        Self { vertices: self.vertices.iter().map(|&v| v + by).collect() }
    }

    /// Rotation about `center`; rigid motions preserve convexity and orientation.
    pub fn rotated(&self, center: Vec2, angle: f64) -> Self {
        Self { vertices: self.vertices.iter().map(|&v| center + (v - center).rotate(angle)).collect() }
    }

    /// Flattened `[x0, y0, x1, y1, ...]` coordinates.
    pub fn to_params(&self) -> Vec<f64> {
        self.vertices.iter().flat_map(|v| [v.x, v.y]).collect()
    }

    /// Point at perimeter position `(edge, t)`, `t` in `[0, 1]`.
    pub fn point_on_edge(&self, edge: usize, t: f64) -> Vec2 {
        let (a, b) = self.edge(edge);
        a.lerp(b, t)
    }

    /// Maximum distance between corresponding vertices.
    pub fn max_vertex_distance(&self, other: &Self) -> f64 {
        self.vertices
            .iter()
            .zip(&other.vertices)
            .map(|(a, b)| a.dist(*b))
            .fold(0.0, f64::max)
    }

    /// Largest distance from a vertex of `self` to the nearest vertex of `other`,
    /// symmetrized; insensitive to vertex labelling.
    pub fn vertex_set_distance(&self, other: &Self) -> f64 {
        let one_way = |p: &Self, q: &Self| {
            p.vertices
                .iter()
                .map(|a| q.vertices.iter().map(|b| a.dist(*b)).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max)
        };
        one_way(self, other).max(one_way(other, self))
    }
}

trait SignedAngle {
    fn angle_to_signed(self, o: Self) -> f64;
}

impl SignedAngle for Vec2 {
    fn angle_to_signed(self, o: Vec2) -> f64 {
        self.cross(o).atan2(self.dot(o))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonconvex_and_clockwise() {
        let cw = vec![Vec2::new(0.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(1.0, 0.0)];
        assert!(ConvexPolygon::new(cw).is_err());
        let dart = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(1.0, 0.2),
            Vec2::new(1.0, 2.0),
        ];
        assert!(ConvexPolygon::new(dart).is_err());
        let collinear = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(1.0, 1.0),
        ];
        assert!(ConvexPolygon::new(collinear).is_err());
    }

    #[test]
    fn square_measures() {
        let s = ConvexPolygon::unit_square();
        assert_eq!(s.area(), 1.0);
        assert_eq!(s.perimeter(), 4.0);
        let c = s.centroid();
        assert!((c.x - 0.5).abs() < 1e-15 && (c.y - 0.5).abs() < 1e-15);
        assert!((s.interior_angle(0) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!(s.contains(Vec2::new(0.5, 0.5)));
        assert!(!s.contains(Vec2::new(1.0, 0.5)));
        assert!(s.contains_closed(Vec2::new(1.0, 0.5), 0.0));
        assert_eq!(s.edge_normal(0), Vec2::new(0.0, -1.0));
    }

    #[test]
    fn hull_drops_interior_points() {
        let pts = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.5, 0.2),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(0.5, 1.0),
        ];
        let h = ConvexPolygon::convex_hull(&pts).unwrap();
        assert_eq!(h.len(), 4);
        assert!((h.area() - 1.0).abs() < 1e-15);
    }
}
