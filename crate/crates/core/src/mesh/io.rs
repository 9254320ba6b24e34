use std::fmt::Write as _;
use std::str::FromStr;

use super::triangulate::outer_boundary_edges;
use super::{Anchor, BoundaryEdge, TriMesh};
use crate::geometry::{ConvexPolygon, Vec2};
use crate::{Error, Result};

// Layout:
//   nodes N triangles T
//   x y                     (N lines)
//   i j k tag               (T lines)
//   boundary B
//   a b side nx ny          (B lines)
//   anchors
//   poly edge t | free      (N lines)
//   meshsize h
//   polygon k x0 y0 x1 y1 ...  (outer is k = 0)
//
// f64 values use the shortest round-trip representation, so reading back is bit-exact.

impl TriMesh {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "nodes {} triangles {}", self.nodes.len(), self.triangles.len());
        for p in &self.nodes {
            let _ = writeln!(s, "{} {}", p.x, p.y);
        }
        for (t, r) in self.triangles.iter().zip(&self.regions) {
            let _ = writeln!(s, "{} {} {} {}", t[0], t[1], t[2], r);
        }
        let _ = writeln!(s, "boundary {}", self.boundary_edges.len());
        for e in &self.boundary_edges {
            let _ = writeln!(s, "{} {} {} {} {}", e.nodes[0], e.nodes[1], e.side, e.normal.x, e.normal.y);
        }
        let _ = writeln!(s, "anchors");
        for a in &self.anchors {
            match a {
                Anchor::Free => {
                    let _ = writeln!(s, "free");
                }
                Anchor::Boundary { poly, edge, t } => {
                    let _ = writeln!(s, "{poly} {edge} {t}");
                }
            }
        }
        let _ = writeln!(s, "meshsize {}", self.mesh_size);
        for (k, poly) in std::iter::once(&self.outer).chain(&self.interfaces).enumerate() {
            let _ = write!(s, "polygon {k}");
            for v in poly.vertices() {
                let _ = write!(s, " {} {}", v.x, v.y);
            }
            let _ = writeln!(s);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<TriMesh> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let mut next = |what: &str| lines.next().ok_or_else(|| Error::MeshFormat(format!("missing {what}")));
        let header: Vec<&str> = next("header")?.split_whitespace().collect();
        let (n, t) = match header.as_slice() {
            ["nodes", n, "triangles", t] => (parse::<usize>(n)?, parse::<usize>(t)?),
            _ => return Err(Error::MeshFormat("header must read `nodes N triangles T`".into())),
        };
        let mut nodes = Vec::with_capacity(n);
        for _ in 0..n {
            let f = fields(next("node")?, 2)?;
            nodes.push(Vec2::new(parse(f[0])?, parse(f[1])?));
        }
        let mut triangles = Vec::with_capacity(t);
        let mut regions = Vec::with_capacity(t);
        for _ in 0..t {
            let f = fields(next("triangle")?, 4)?;
            let tri = [parse(f[0])?, parse(f[1])?, parse(f[2])?];
            if tri.iter().any(|&i: &usize| i >= n) {
                return Err(Error::MeshFormat("triangle references a missing node".into()));
            }
            triangles.push(tri);
            regions.push(parse(f[3])?);
        }
        let bline = next("boundary header")?;
        let b: usize = match bline.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["boundary", b] => parse(b)?,
            _ => return Err(Error::MeshFormat("expected `boundary B`".into())),
        };
        let mut boundary_edges = Vec::with_capacity(b);
        for _ in 0..b {
            let f = fields(next("boundary edge")?, 5)?;
            boundary_edges.push(BoundaryEdge {
                nodes: [parse(f[0])?, parse(f[1])?],
                side: parse(f[2])?,
                normal: Vec2::new(parse(f[3])?, parse(f[4])?),
            });
        }
        if next("anchors header")?.trim() != "anchors" {
            return Err(Error::MeshFormat("expected `anchors`".into()));
        }
        let mut anchors = Vec::with_capacity(n);
        for _ in 0..n {
            let l = next("anchor")?;
            if l.trim() == "free" {
                anchors.push(Anchor::Free);
            } else {
                let f = fields(l, 3)?;
                anchors.push(Anchor::Boundary { poly: parse(f[0])?, edge: parse(f[1])?, t: parse(f[2])? });
            }
        }
        let ms = next("mesh size")?;
        let mesh_size = match ms.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["meshsize", h] => parse(h)?,
            _ => return Err(Error::MeshFormat("expected `meshsize h`".into())),
        };
        let mut polys = Vec::new();
        for l in lines {
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.first() != Some(&"polygon") || f.len() < 2 || (f.len() - 2) % 2 != 0 {
                return Err(Error::MeshFormat(format!("bad polygon line `{l}`")));
            }
            let coords: Vec<f64> = f[2..].iter().map(|x| parse(x)).collect::<Result<_>>()?;
            let verts = coords.chunks(2).map(|c| Vec2::new(c[0], c[1])).collect();
            polys.push(ConvexPolygon::new(verts).map_err(|e| Error::MeshFormat(e.to_string()))?);
        }
        if polys.is_empty() {
            return Err(Error::MeshFormat("missing outer polygon".into()));
        }
        let outer = polys.remove(0);
        let mesh = TriMesh { nodes, triangles, regions, boundary_edges, mesh_size, anchors, outer, interfaces: polys };
        mesh.check().map_err(|e| Error::MeshFormat(e.to_string()))?;
        let rebuilt = outer_boundary_edges(&mesh.outer, &mesh.nodes, &mesh.anchors)?;
        if rebuilt.iter().map(|e| e.nodes).ne(mesh.boundary_edges.iter().map(|e| e.nodes)) {
            return Err(Error::MeshFormat("boundary edges disagree with anchors".into()));
        }
        Ok(mesh)
    }

    pub fn write(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: &std::path::Path) -> Result<TriMesh> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

fn fields(line: &str, n: usize) -> Result<Vec<&str>> {
    let f: Vec<&str> = line.split_whitespace().collect();
    if f.len() != n {
        return Err(Error::MeshFormat(format!("expected {n} fields in `{line}`")));
    }
    Ok(f)
}

fn parse<T: FromStr>(s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::MeshFormat(format!("cannot parse `{s}`")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::triangulate;

    #[test]
    fn text_round_trip_is_exact() {
        let inner = ConvexPolygon::rectangle(0.2, 0.3, 0.7, 0.6).unwrap();
        let m = triangulate(&ConvexPolygon::unit_square(), &[inner], 0.15).unwrap();
        let back = TriMesh::from_text(&m.to_text()).unwrap();
        assert_eq!(back, m);
        assert!(m.to_text().starts_with(&format!("nodes {} triangles {}\n", m.nodes.len(), m.triangles.len())));
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(TriMesh::from_text("hello"), Err(Error::MeshFormat(_))));
        assert!(matches!(TriMesh::from_text("nodes 1 triangles 1\n0 0\n0 0 5 0\n"), Err(Error::MeshFormat(_))));
    }
}
