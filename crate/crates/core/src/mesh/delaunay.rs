//! Incremental Bowyer–Watson Delaunay triangulation with neighbour links.

use std::collections::HashSet;

use crate::geometry::Vec2;

pub(crate) const NONE: usize = usize::MAX;

#[derive(Debug, Clone)]
pub(crate) struct Tri {
    pub v: [usize; 3],
    /// `n[i]` is the neighbour across the edge opposite `v[i]`.
    pub n: [usize; 3],
    pub alive: bool,
}

pub(crate) fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

/// Positive when `d` lies inside the circumcircle of the counterclockwise triangle `abc`.
pub(crate) fn incircle(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> f64 {
    let (adx, ady) = (a.x - d.x, a.y - d.y);
    let (bdx, bdy) = (b.x - d.x, b.y - d.y);
    let (cdx, cdy) = (c.x - d.x, c.y - d.y);
    let ad = adx * adx + ady * ady;
    let bd = bdx * bdx + bdy * bdy;
    let cd = cdx * cdx + cdy * cdy;
    adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx)
}

pub(crate) fn circumcenter(a: Vec2, b: Vec2, c: Vec2) -> Vec2 {
    let (bx, by) = (b.x - a.x, b.y - a.y);
    let (cx, cy) = (c.x - a.x, c.y - a.y);
    let d = 2.0 * (bx * cy - by * cx);
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    Vec2::new(a.x + (cy * b2 - by * c2) / d, a.y + (bx * c2 - cx * b2) / d)
}

pub(crate) fn circumradius(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    let area2 = orient(a, b, c).abs();
    if area2 == 0.0 {
        return f64::INFINITY;
    }
    a.dist(b) * b.dist(c) * c.dist(a) / (2.0 * area2)
}

pub(crate) struct Delaunay {
    pub pts: Vec<Vec2>,
    pub tris: Vec<Tri>,
    last: usize,
}

impl Delaunay {
    /// Starts from a super triangle (points 0..3) enclosing the box `[lo, hi]`.
    pub fn new(lo: Vec2, hi: Vec2) -> Self {
        let c = (lo + hi) * 0.5;
        let r = (hi - lo).norm().max(1e-300) * 50.0;
        let pts = vec![
            c + Vec2::new(-r, -r),
            c + Vec2::new(r, -r),
            c + Vec2::new(0.0, r),
        ];
        let tris = vec![Tri { v: [0, 1, 2], n: [NONE; 3], alive: true }];
        Self { pts, tris, last: 0 }
    }

    /// Orientation of `p` against the edge opposite `v[i]`, relative to the edge length squared.
    fn side(&self, t: usize, i: usize, p: Vec2) -> f64 {
        let tri = &self.tris[t];
        let (a, b) = (self.pts[tri.v[(i + 1) % 3]], self.pts[tri.v[(i + 2) % 3]]);
        orient(a, b, p) / (b - a).dot(b - a)
    }

    fn locate(&self, p: Vec2) -> usize {
        let mut t = if self.tris[self.last].alive {
            self.last
        } else {
            self.tris.iter().rposition(|t| t.alive).expect("live triangle")
        };
        let limit = 4 * self.tris.len() + 16;
        'walk: for _ in 0..limit {
            for i in 0..3 {
                let nb = self.tris[t].n[i];
                // Points on an edge may test slightly outside from both sides; do not cross then.
                if nb != NONE && self.side(t, i, p) < -1e-13 {
                    t = nb;
                    continue 'walk;
                }
            }
            return t;
        }
        // Walk cycled on a degenerate configuration: take the least violated triangle.
        let score = |t: usize| (0..3).map(|i| self.side(t, i, p)).fold(f64::INFINITY, f64::min);
        (0..self.tris.len())
            .filter(|&t| self.tris[t].alive)
            .max_by(|&x, &y| score(x).total_cmp(&score(y)))
            .expect("live triangle")
    }

    fn push(&mut self, v: [usize; 3], n: [usize; 3]) -> usize {
        self.tris.push(Tri { v, n, alive: true });
        self.tris.len() - 1
    }

    /// Neighbour of `t` across the edge `{x, y}`.
    fn across(&self, t: usize, x: usize, y: usize) -> usize {
        let tri = &self.tris[t];
        (0..3)
            .find(|&i| {
                let (a, b) = (tri.v[(i + 1) % 3], tri.v[(i + 2) % 3]);
                (a == x && b == y) || (a == y && b == x)
            })
            .map_or(NONE, |i| tri.n[i])
    }

    fn relink(&mut self, t: usize, old: usize, new: usize) {
        if t != NONE {
            for k in self.tris[t].n.iter_mut() {
                if *k == old {
                    *k = new;
                }
            }
        }
    }

    /// Inserts a point by splitting its triangle (or the edge it lies on) and restoring the
    /// Delaunay property with edge flips; returns its index.
    pub fn insert(&mut self, p: Vec2) -> usize {
        let pi = self.pts.len();
        self.pts.push(p);
        let t = self.locate(p);
        let tv = self.tris[t].v;
        // Closest edge relative to its squared length.
        let (i, rel) = (0..3)
            .map(|i| {
                let (a, b) = (self.pts[tv[(i + 1) % 3]], self.pts[tv[(i + 2) % 3]]);
                (i, orient(a, b, p) / (a - b).dot(a - b))
            })
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("three edges");
        let mut stack = Vec::new();
        if rel.abs() <= 1e-12 {
            let (c, a, b) = (tv[i], tv[(i + 1) % 3], tv[(i + 2) % 3]);
            let u = self.tris[t].n[i];
            let t_ca = self.across(t, c, a);
            let t_bc = self.across(t, b, c);
            let t1 = t;
            let t2 = self.push([c, pi, b], [NONE, t_bc, t1]);
            self.tris[t1] = Tri { v: [c, a, pi], n: [NONE, t2, t_ca], alive: true };
            self.relink(t_bc, t, t2);
            stack.extend([t1, t2]);
            if u != NONE {
                let d = self.tris[u].v.iter().copied().find(|&x| x != a && x != b).expect("apex");
                let u_db = self.across(u, d, b);
                let u_ad = self.across(u, a, d);
                let u1 = u;
                let u2 = self.push([d, pi, a], [t1, u_ad, u1]);
                self.tris[u1] = Tri { v: [d, b, pi], n: [t2, u2, u_db], alive: true };
                self.relink(u_ad, u, u2);
                self.tris[t1].n[0] = u2;
                self.tris[t2].n[0] = u1;
                stack.extend([u1, u2]);
            }
        } else {
            let [v0, v1, v2] = tv;
            let [n0, n1, n2] = self.tris[t].n;
            let a = t;
            let b = self.push([v1, v2, pi], [NONE, NONE, n0]);
            let c = self.push([v2, v0, pi], [NONE, NONE, n1]);
            self.tris[a] = Tri { v: [v0, v1, pi], n: [b, c, n2], alive: true };
            self.tris[b].n = [c, a, n0];
            self.tris[c].n = [a, b, n1];
            self.relink(n0, t, b);
            self.relink(n1, t, c);
            stack.extend([a, b, c]);
        }
        while let Some(t) = stack.pop() {
            let v = self.tris[t].v;
            let k = v.iter().position(|&x| x == pi).expect("new point");
            let (x, y) = (v[(k + 1) % 3], v[(k + 2) % 3]);
            let o = self.tris[t].n[k];
            if o == NONE {
                continue;
            }
            let d = self.tris[o].v.iter().copied().find(|&q| q != x && q != y).expect("apex");
            if incircle(self.pts[pi], self.pts[x], self.pts[y], self.pts[d]) <= 0.0 {
                continue;
            }
            let t_px = self.across(t, pi, x);
            let t_yp = self.across(t, y, pi);
            let o_xd = self.across(o, x, d);
            let o_dy = self.across(o, d, y);
            self.tris[t] = Tri { v: [pi, x, d], n: [o_xd, o, t_px], alive: true };
            self.tris[o] = Tri { v: [pi, d, y], n: [o_dy, t_yp, t], alive: true };
            self.relink(o_xd, o, t);
            self.relink(t_yp, t, o);
            stack.extend([t, o]);
        }
        self.last = t;
        pi
    }

    pub fn alive(&self) -> impl Iterator<Item = &Tri> + '_ {
        self.tris.iter().filter(|t| t.alive)
    }

    /// Set of undirected edges of triangles not touching the super vertices.
    pub fn edge_set(&self) -> HashSet<(usize, usize)> {
        let mut s = HashSet::new();
        for t in self.alive() {
            for i in 0..3 {
                let (a, b) = (t.v[i], t.v[(i + 1) % 3]);
                s.insert((a.min(b), a.max(b)));
            }
        }
        s
    }
}
