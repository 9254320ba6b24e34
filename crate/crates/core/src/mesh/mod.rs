//! Conforming triangulations of a convex domain with embedded convex interfaces.

mod delaunay;
mod io;
mod morph;
mod refine;
mod triangulate;

use serde::{Deserialize, Serialize};

use crate::geometry::{ConvexPolygon, Vec2};

pub use morph::Morpher;
pub use triangulate::triangulate;

/// Position of a node on a polygon boundary.
///
/// `poly == 0` is the outer boundary, `poly == k` the `k`-th interface (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Anchor {
    Free,
    Boundary { poly: usize, edge: usize, t: f64 },
}

impl Anchor {
    pub fn poly(&self) -> Option<usize> {
        match *self {
            Anchor::Boundary { poly, .. } => Some(poly),
            Anchor::Free => None,
        }
    }

    /// Parameter of this anchor along `edge` of an `n`-gon, if it lies on that edge.
    fn t_on_edge(&self, edge: usize, n: usize) -> Option<f64> {
        match *self {
            Anchor::Boundary { edge: e, t, .. } if e == edge => Some(t),
            Anchor::Boundary { edge: e, t, .. } if t == 0.0 && (edge + 1) % n == e => Some(1.0),
            _ => None,
        }
    }

    /// Anchor of the midpoint of a mesh edge, when the edge lies on a polygon side.
    pub(crate) fn midpoint(a: Anchor, b: Anchor, sides: &[usize]) -> Anchor {
        let (Anchor::Boundary { poly: pa, edge: ea, .. }, Anchor::Boundary { poly: pb, edge: eb, .. }) = (a, b)
        else {
            return Anchor::Free;
        };
        if pa != pb {
            return Anchor::Free;
        }
        let n = sides[pa];
        for edge in [ea, eb] {
            if let (Some(ta), Some(tb)) = (a.t_on_edge(edge, n), b.t_on_edge(edge, n)) {
                return Anchor::Boundary { poly: pa, edge, t: 0.5 * (ta + tb) };
            }
        }
        Anchor::Free
    }
}

/// Edge on the outer boundary; `side` indexes the outer polygon edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub normal: Vec2,
    pub side: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub nodes: Vec<Vec2>,
    /// Counterclockwise node triples.
    pub triangles: Vec<[usize; 3]>,
    /// 0 for the background, `k` for the region inside interface `k` and outside deeper ones.
    pub regions: Vec<usize>,
    /// Outer boundary edges in counterclockwise order.
    pub boundary_edges: Vec<BoundaryEdge>,
    pub mesh_size: f64,
    pub anchors: Vec<Anchor>,
    pub outer: ConvexPolygon,
    pub interfaces: Vec<ConvexPolygon>,
}

impl TriMesh {
    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        0.5 * (self.nodes[b] - self.nodes[a]).cross(self.nodes[c] - self.nodes[a])
    }

    /// Gradients of the three P1 basis functions and the triangle area.
    pub fn shape_gradients(&self, t: usize) -> ([Vec2; 3], f64) {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        let area2 = (pb - pa).cross(pc - pa);
        let g = |p: Vec2, q: Vec2| {
            let e = q - p;
            Vec2::new(-e.y, e.x) * (1.0 / area2)
        };
        ([g(pb, pc), g(pc, pa), g(pa, pb)], 0.5 * area2)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.area(t)).sum()
    }

    pub fn region_area(&self, region: usize) -> f64 {
        (0..self.triangles.len()).filter(|&t| self.regions[t] == region).map(|t| self.area(t)).sum()
    }

    pub fn centroid(&self, t: usize) -> Vec2 {
        let [a, b, c] = self.triangles[t];
        (self.nodes[a] + self.nodes[b] + self.nodes[c]) * (1.0 / 3.0)
    }

    pub fn max_edge_length(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| (0..3).map(move |i| (t[i], t[(i + 1) % 3])))
            .map(|(a, b)| self.nodes[a].dist(self.nodes[b]))
            .fold(0.0, f64::max)
    }

    pub fn max_circumradius(&self) -> f64 {
        self.triangles
            .iter()
            .map(|&[a, b, c]| delaunay::circumradius(self.nodes[a], self.nodes[b], self.nodes[c]))
            .fold(0.0, f64::max)
    }

    /// Region index of a point by the innermost containing interface.
    pub fn classify(interfaces: &[ConvexPolygon], p: Vec2) -> usize {
        interfaces
            .iter()
            .enumerate()
            .filter(|(_, poly)| poly.contains(p))
            .min_by(|a, b| a.1.area().total_cmp(&b.1.area()))
            .map_or(0, |(i, _)| i + 1)
    }

    /// Outer boundary nodes in counterclockwise order, starting at outer vertex 0.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        self.boundary_edges.iter().map(|e| e.nodes[0]).collect()
    }

    pub fn is_boundary_node(&self) -> Vec<bool> {
        let mut b = vec![false; self.nodes.len()];
        for e in &self.boundary_edges {
            b[e.nodes[0]] = true;
            b[e.nodes[1]] = true;
        }
        b
    }

    /// Node located at `p` (within `tol`), if any.
    pub fn node_at(&self, p: Vec2, tol: f64) -> Option<usize> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, q)| (i, q.dist(p)))
            .filter(|&(_, d)| d <= tol)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    }

    /// Triangle containing `p` and its barycentric coordinates.
    pub fn locate(&self, p: Vec2) -> Option<(usize, [f64; 3])> {
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for (t, &[a, b, c]) in self.triangles.iter().enumerate() {
            let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
            let area = (pb - pa).cross(pc - pa);
            let l0 = (pb - p).cross(pc - p) / area;
            let l1 = (pc - p).cross(pa - p) / area;
            let l2 = 1.0 - l0 - l1;
            let worst = l0.min(l1).min(l2);
            if best.as_ref().is_none_or(|b| worst > b.2) {
                best = Some((t, [l0, l1, l2], worst));
            }
        }
        best.filter(|b| b.2 >= -1e-10).map(|(t, l, _)| (t, l))
    }

    /// Structural checks: positive areas, boundary edges matched, no hanging nodes.
    pub fn check(&self) -> crate::Result<()> {
        use std::collections::HashMap;
        for t in 0..self.triangles.len() {
            if !(self.area(t) > 0.0) {
                return Err(crate::Error::InvertedElement { triangle: t });
            }
        }
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for i in 0..3 {
                let (a, b) = (tri[i], tri[(i + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let boundary: usize = count.values().filter(|&&c| c == 1).count();
        if count.values().any(|&c| c > 2) || boundary != self.boundary_edges.len() {
            return Err(crate::Error::Mesh("nonconforming edge structure".into()));
        }
        for e in &self.boundary_edges {
            let (a, b) = (e.nodes[0], e.nodes[1]);
            if count.get(&(a.min(b), a.max(b))) != Some(&1) {
                return Err(crate::Error::Mesh("boundary edge is not a mesh edge".into()));
            }
        }
        let mut used = vec![false; self.nodes.len()];
        for tri in &self.triangles {
            for &v in tri {
                used[v] = true;
            }
        }
        if used.iter().any(|u| !u) {
            return Err(crate::Error::Mesh("orphan node".into()));
        }
        Ok(())
    }

    /// Whether every interface side is a union of mesh edges.
    pub fn interfaces_conform(&self) -> bool {
        use std::collections::HashSet;
        let edges: HashSet<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|t| (0..3).map(move |i| (t[i].min(t[(i + 1) % 3]), t[i].max(t[(i + 1) % 3]))))
            .collect();
        for (k, poly) in self.interfaces.iter().enumerate() {
            for e in 0..poly.len() {
                let mut on: Vec<(f64, usize)> = self
                    .anchors
                    .iter()
                    .enumerate()
                    .filter_map(|(i, a)| match *a {
                        Anchor::Boundary { poly: p, .. } if p == k + 1 => a.t_on_edge(e, poly.len()).map(|t| (t, i)),
                        _ => None,
                    })
                    .collect();
                on.sort_by(|a, b| a.0.total_cmp(&b.0));
                if on.first().map(|x| x.0) != Some(0.0) || on.last().map(|x| x.0) != Some(1.0) {
                    return false;
                }
                if on.windows(2).any(|w| !edges.contains(&(w[0].1.min(w[1].1), w[0].1.max(w[1].1)))) {
                    return false;
                }
            }
        }
        true
    }
}
