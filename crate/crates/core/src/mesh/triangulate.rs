use std::collections::HashMap;

use super::delaunay::{circumcenter, circumradius, Delaunay, NONE};
use super::{Anchor, BoundaryEdge, TriMesh};
use crate::geometry::{boundary_distance, point_segment_distance, ConvexPolygon, Vec2};
use crate::{Error, Result};

/// Boundary and interface spacing relative to the target circumradius.
const SPACING: f64 = 0.75;
/// Lattice points keep this fraction of the spacing away from constraint segments.
const CLEARANCE: f64 = 0.55;

/// Constraint piece between two inserted points on a polygon side.
#[derive(Debug, Clone, Copy)]
struct Piece {
    a: usize,
    b: usize,
    poly: usize,
    edge: usize,
    ta: f64,
    tb: f64,
}

struct Builder<'a> {
    polys: Vec<&'a ConvexPolygon>,
    dt: Delaunay,
    anchors: Vec<Anchor>,
    pieces: Vec<Piece>,
}

impl Builder<'_> {
    fn add(&mut self, p: Vec2, anchor: Anchor) -> usize {
        let i = self.dt.insert(p);
        debug_assert_eq!(i, self.anchors.len());
        self.anchors.push(anchor);
        i
    }

    fn split(&mut self, k: usize) {
        let pc = self.pieces[k];
        let t = 0.5 * (pc.ta + pc.tb);
        let p = self.polys[pc.poly].point_on_edge(pc.edge, t);
        let m = self.add(p, Anchor::Boundary { poly: pc.poly, edge: pc.edge, t });
        self.pieces[k] = Piece { b: m, tb: t, ..pc };
        self.pieces.push(Piece { a: m, ta: t, ..pc });
    }

    fn encroached_piece(&self, p: Vec2) -> Option<usize> {
        self.pieces.iter().position(|pc| {
            let (a, b) = (self.dt.pts[pc.a], self.dt.pts[pc.b]);
            p.dist((a + b) * 0.5) < 0.5 * a.dist(b)
        })
    }
}

fn hash_jitter(i: usize, j: usize) -> (f64, f64) {
    let s = (i as f64 * 12.9898 + j as f64 * 78.233).sin() * 43758.5453;
    let t = (i as f64 * 39.3467 + j as f64 * 11.135).sin() * 24634.6345;
    (s.fract(), t.fract())
}

fn validate_inputs(outer: &ConvexPolygon, interfaces: &[ConvexPolygon], h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Mesh(format!("mesh size must be positive, got {h}")));
    }
    let cells = outer.area() / (h * h);
    if cells > 5e6 {
        return Err(Error::Mesh(format!("mesh size {h} too small for the domain")));
    }
    for (k, poly) in interfaces.iter().enumerate() {
        if !poly.vertices().iter().all(|&v| outer.contains(v)) || boundary_distance(outer, poly) == 0.0 {
            return Err(Error::Mesh(format!("interface {k} is not strictly inside the domain")));
        }
        for (j, other) in interfaces.iter().enumerate().skip(k + 1) {
            if boundary_distance(poly, other) == 0.0 {
                return Err(Error::Mesh(format!("interfaces {k} and {j} intersect")));
            }
        }
    }
    Ok(())
}

/// Conforming Delaunay-type triangulation with every interface side resolved by mesh edges
/// and every circumradius at most `h`.
pub fn triangulate(outer: &ConvexPolygon, interfaces: &[ConvexPolygon], h: f64) -> Result<TriMesh> {
    validate_inputs(outer, interfaces, h)?;
    let s = SPACING * h;
    let (lo, hi) = outer.bounding_box();
    let mut polys = vec![outer];
    polys.extend(interfaces.iter());
    let mut b = Builder { polys: polys.clone(), dt: Delaunay::new(lo, hi), anchors: vec![Anchor::Free; 3], pieces: Vec::new() };

    // Constraint points: vertices and equally spaced side points.
    for (pi, poly) in polys.iter().enumerate() {
        let n = poly.len();
        let mut first_of_edge = Vec::with_capacity(n);
        for e in 0..n {
            first_of_edge.push(b.add(poly.vertex(e), Anchor::Boundary { poly: pi, edge: e, t: 0.0 }));
        }
        for e in 0..n {
            let (p, q) = poly.edge(e);
            let m = (p.dist(q) / s).ceil().max(1.0) as usize;
            let mut prev = (first_of_edge[e], 0.0);
            for k in 1..m {
                let t = k as f64 / m as f64;
                let id = b.add(p.lerp(q, t), Anchor::Boundary { poly: pi, edge: e, t });
                b.pieces.push(Piece { a: prev.0, b: id, poly: pi, edge: e, ta: prev.1, tb: t });
                prev = (id, t);
            }
            b.pieces.push(Piece { a: prev.0, b: first_of_edge[(e + 1) % n], poly: pi, edge: e, ta: prev.1, tb: 1.0 });
        }
    }

    // Interior hexagonal lattice with a deterministic jitter that breaks cocircularity.
    let dy = s * 3f64.sqrt() / 2.0;
    let rows = ((hi.y - lo.y) / dy).ceil() as usize + 1;
    let cols = ((hi.x - lo.x) / s).ceil() as usize + 2;
    for r in 0..rows {
        for c in 0..cols {
            let (jx, jy) = hash_jitter(r, c);
            let x = lo.x + (c as f64 + if r % 2 == 1 { 0.5 } else { 0.0 }) * s + 1e-3 * s * jx;
            let y = lo.y + r as f64 * dy + 1e-3 * s * jy;
            let p = Vec2::new(x, y);
            if outer.inward_margin(p) < CLEARANCE * s {
                continue;
            }
            if interfaces.iter().any(|poly| poly.boundary_distance(p) < CLEARANCE * s) {
                continue;
            }
            b.add(p, Anchor::Free);
        }
    }

    let budget = 20 * b.anchors.len() + 1000;
    let mut inserted = 0;
    loop {
        // Conformity: split constraint pieces missing from the triangulation.
        let edges = b.dt.edge_set();
        let missing: Vec<usize> = (0..b.pieces.len())
            .filter(|&k| {
                let pc = b.pieces[k];
                !edges.contains(&(pc.a.min(pc.b), pc.a.max(pc.b)))
            })
            .collect();
        if !missing.is_empty() {
            for k in missing {
                b.split(k);
                inserted += 1;
            }
            if inserted > budget {
                return Err(Error::Mesh("constraint recovery did not terminate".into()));
            }
            continue;
        }
        // Quality: circumradius at most h for triangles inside the domain.
        let big: Vec<[usize; 3]> = b
            .dt
            .alive()
            .filter(|t| t.v.iter().all(|&v| v >= 3))
            .map(|t| t.v)
            .filter(|v| circumradius(b.dt.pts[v[0]], b.dt.pts[v[1]], b.dt.pts[v[2]]) > h)
            .collect();
        if big.is_empty() {
            break;
        }
        for v in big.into_iter().take(64) {
            let live = b.dt.alive().any(|t| {
                let mut a = t.v;
                let mut w = v;
                a.sort_unstable();
                w.sort_unstable();
                a == w
            });
            if !live {
                continue;
            }
            let c = circumcenter(b.dt.pts[v[0]], b.dt.pts[v[1]], b.dt.pts[v[2]]);
            if let Some(k) = b.encroached_piece(c) {
                b.split(k);
            } else if outer.inward_margin(c) <= 0.0 {
                let k = (0..b.pieces.len())
                    .filter(|&k| b.pieces[k].poly == 0)
                    .min_by(|&x, &y| {
                        let d = |k: usize| point_segment_distance(c, b.dt.pts[b.pieces[k].a], b.dt.pts[b.pieces[k].b]);
                        d(x).total_cmp(&d(y))
                    })
                    .expect("outer pieces exist");
                b.split(k);
            } else {
                b.add(c, Anchor::Free);
            }
            inserted += 1;
        }
        if inserted > budget {
            return Err(Error::Mesh("quality refinement did not terminate".into()));
        }
    }
    assemble(b, outer, interfaces, h)
}

fn assemble(b: Builder, outer: &ConvexPolygon, interfaces: &[ConvexPolygon], h: f64) -> Result<TriMesh> {
    let pts = &b.dt.pts;
    let tri_list: Vec<[usize; 3]> = b
        .dt
        .alive()
        .filter(|t| t.v.iter().all(|&v| v >= 3))
        .filter(|t| {
            // Drop flat slivers on a straight outer side.
            let v = t.v;
            let (a, c, d) = (pts[v[0]], pts[v[1]], pts[v[2]]);
            let area = 0.5 * (c - a).cross(d - a);
            let scale = a.dist(c).max(c.dist(d)).max(d.dist(a));
            area > 1e-10 * scale * scale
        })
        .map(|t| t.v)
        .collect();
    let _ = NONE;
    let mut used = vec![false; pts.len()];
    for t in &tri_list {
        for &v in t {
            used[v] = true;
        }
    }
    let mut remap = vec![usize::MAX; pts.len()];
    let mut nodes = Vec::new();
    let mut anchors = Vec::new();
    for i in 3..pts.len() {
        if used[i] {
            remap[i] = nodes.len();
            nodes.push(pts[i]);
            anchors.push(b.anchors[i]);
        }
    }
    let triangles: Vec<[usize; 3]> = tri_list.iter().map(|t| [remap[t[0]], remap[t[1]], remap[t[2]]]).collect();
    let regions = triangles
        .iter()
        .map(|t| TriMesh::classify(interfaces, (nodes[t[0]] + nodes[t[1]] + nodes[t[2]]) * (1.0 / 3.0)))
        .collect();
    let boundary_edges = outer_boundary_edges(outer, &nodes, &anchors)?;
    let mesh = TriMesh {
        nodes,
        triangles,
        regions,
        boundary_edges,
        mesh_size: h,
        anchors,
        outer: outer.clone(),
        interfaces: interfaces.to_vec(),
    };
    mesh.check()?;
    Ok(mesh)
}

/// Outer boundary edges ordered counterclockwise from anchors.
pub(crate) fn outer_boundary_edges(outer: &ConvexPolygon, nodes: &[Vec2], anchors: &[Anchor]) -> Result<Vec<BoundaryEdge>> {
    let n = outer.len();
    let mut per_side: HashMap<usize, Vec<(f64, usize)>> = HashMap::new();
    for (i, a) in anchors.iter().enumerate() {
        if let Anchor::Boundary { poly: 0, edge, t } = *a {
            per_side.entry(edge).or_default().push((t, i));
        }
    }
    let mut vertex_node = vec![usize::MAX; n];
    for (e, list) in &per_side {
        for &(t, i) in list {
            if t == 0.0 {
                vertex_node[*e] = i;
            }
        }
    }
    if vertex_node.contains(&usize::MAX) {
        return Err(Error::Mesh("outer vertex missing from mesh".into()));
    }
    let mut edges = Vec::new();
    for e in 0..n {
        let mut list = per_side.remove(&e).unwrap_or_default();
        list.sort_by(|a, b| a.0.total_cmp(&b.0));
        list.push((1.0, vertex_node[(e + 1) % n]));
        let normal = outer.edge_normal(e);
        for w in list.windows(2) {
            if nodes[w[0].1].dist(nodes[w[1].1]) == 0.0 {
                return Err(Error::Mesh("duplicate boundary node".into()));
            }
            edges.push(BoundaryEdge { nodes: [w[0].1, w[1].1], normal, side: e });
        }
    }
    Ok(edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coarse_square() {
        let m = triangulate(&ConvexPolygon::unit_square(), &[], 0.5).unwrap();
        assert!(m.triangles.len() >= 8);
        assert!(m.regions.iter().all(|&r| r == 0));
        assert!((m.total_area() - 1.0).abs() < 1e-12);
        assert!(m.max_circumradius() <= 0.5);
    }

    #[test]
    fn inner_square_conforms() {
        let inner = ConvexPolygon::rectangle(0.25, 0.25, 0.75, 0.75).unwrap();
        let m = triangulate(&ConvexPolygon::unit_square(), &[inner], 0.1).unwrap();
        assert!(m.interfaces_conform());
        assert!((m.region_area(1) - 0.25).abs() < 1e-12);
        assert!((m.region_area(0) - 0.75).abs() < 1e-12);
        assert!(m.max_circumradius() <= 0.1);
    }

    #[test]
    fn crossing_interface_is_rejected() {
        let bad = ConvexPolygon::rectangle(0.5, 0.5, 1.5, 0.8).unwrap();
        assert!(matches!(triangulate(&ConvexPolygon::unit_square(), &[bad], 0.2), Err(Error::Mesh(_))));
    }

    #[test]
    fn triangle_in_square() {
        let tri = ConvexPolygon::new(vec![Vec2::new(0.3, 0.3), Vec2::new(0.7, 0.35), Vec2::new(0.45, 0.7)]).unwrap();
        let m = triangulate(&ConvexPolygon::unit_square(), std::slice::from_ref(&tri), 0.05).unwrap();
        assert!(m.interfaces_conform());
        assert!((m.region_area(1) - tri.area()).abs() < 1e-12 * tri.area().max(1.0));
    }

    #[test]
    fn small_interface_near_a_tilted_one() {
        // Split points on a tilted side used to test outside both neighbours and stall location.
        let p = |v: &[f64]| ConvexPolygon::new(v.chunks(2).map(|c| Vec2::new(c[0], c[1])).collect()).unwrap();
        let a = p(&[0.1009, 0.1105, 0.8720, 0.1204, 0.8621, 0.8915, 0.0910, 0.8816]);
        let b = p(&[0.5126, 0.2005, 0.5327, 0.2081, 0.5251, 0.2282, 0.5050, 0.2206]);
        let m = triangulate(&ConvexPolygon::unit_square(), &[a.clone(), b.clone()], 0.05).unwrap();
        assert!(m.interfaces_conform());
        assert!((m.region_area(2) - b.area()).abs() < 1e-12);
        assert!((m.region_area(1) - (a.area() - b.area())).abs() < 1e-12);
    }
}
