use std::sync::Arc;

use super::{Anchor, TriMesh};
use crate::geometry::ConvexPolygon;
use crate::linalg::{BandLu, CsrMatrix, SparsePattern};
use crate::{Error, Result, C64};

/// Deforms a reference mesh onto new interface polygons with the same vertex counts.
///
/// Interface nodes slide to the same edge parameters on the new polygons, outer nodes stay
/// fixed and free nodes follow the harmonic extension of the interface displacement.
/// The displacement `(dx, dy)` is solved as the single complex field `dx + i dy`.
pub struct Morpher {
    reference: TriMesh,
    lu: BandLu,
}

impl Morpher {
    pub fn new(reference: TriMesh) -> Result<Self> {
        let n = reference.nodes.len();
        let pattern = Arc::new(SparsePattern::from_elements(n, &reference.triangles));
        let mut k = CsrMatrix::zeros(pattern);
        for t in 0..reference.triangles.len() {
            let (g, area) = reference.shape_gradients(t);
            let tri = reference.triangles[t];
            for i in 0..3 {
                for j in 0..3 {
                    k.add(tri[i], tri[j], C64::new(area * g[i].dot(g[j]), 0.0));
                }
            }
        }
        for (i, a) in reference.anchors.iter().enumerate() {
            if matches!(a, Anchor::Boundary { .. }) {
                k.set_identity_row(i);
            }
        }
        let lu = BandLu::factor(&k)?;
        Ok(Self { reference, lu })
    }

    pub fn reference(&self) -> &TriMesh {
        &self.reference
    }

    pub fn apply(&self, interfaces: &[ConvexPolygon]) -> Result<TriMesh> {
        let r = &self.reference;
        if interfaces.len() != r.interfaces.len()
            || interfaces.iter().zip(&r.interfaces).any(|(a, b)| a.len() != b.len())
        {
            return Err(Error::Dimension("morph target must keep interface and vertex counts".into()));
        }
        let n = r.nodes.len();
        let mut rhs = vec![C64::new(0.0, 0.0); n];
        for (i, a) in r.anchors.iter().enumerate() {
            if let Anchor::Boundary { poly, edge, t } = *a {
                if poly > 0 {
                    let d = interfaces[poly - 1].point_on_edge(edge, t) - r.nodes[i];
                    rhs[i] = C64::new(d.x, d.y);
                }
            }
        }
        // Row elimination left the free rows coupled to anchored values; the
        // nonsymmetric factor handles that directly.
        let disp = self.lu.solve(&rhs);
        let nodes = r
            .nodes
            .iter()
            .zip(&disp)
            .map(|(p, d)| *p + crate::geometry::Vec2::new(d.re, d.im))
            .collect();
        let mesh = TriMesh { nodes, interfaces: interfaces.to_vec(), ..r.clone() };
        for t in 0..mesh.triangles.len() {
            if !(mesh.area(t) > 0.0) {
                return Err(Error::InvertedElement { triangle: t });
            }
        }
        Ok(mesh)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;
    use crate::mesh::triangulate;

    fn tri(dx: f64) -> ConvexPolygon {
        ConvexPolygon::new(vec![Vec2::new(0.3 + dx, 0.3), Vec2::new(0.7, 0.35), Vec2::new(0.45, 0.7)]).unwrap()
    }

    #[test]
    fn morph_tracks_interface_and_preserves_areas() {
        let m = triangulate(&ConvexPolygon::unit_square(), &[tri(0.0)], 0.1).unwrap();
        let morpher = Morpher::new(m).unwrap();
        let target = tri(0.04);
        let moved = morpher.apply(std::slice::from_ref(&target)).unwrap();
        moved.check().unwrap();
        assert!((moved.region_area(1) - target.area()).abs() < 1e-12);
        assert!((moved.total_area() - 1.0).abs() < 1e-12);
        assert!(moved.interfaces_conform());
    }

    #[test]
    fn large_move_inverts() {
        let m = triangulate(&ConvexPolygon::unit_square(), &[tri(0.0)], 0.1).unwrap();
        let morpher = Morpher::new(m).unwrap();
        let far = ConvexPolygon::new(vec![Vec2::new(0.05, 0.05), Vec2::new(0.95, 0.9), Vec2::new(0.9, 0.95)]).unwrap();
        assert!(morpher.apply(&[far]).is_err());
    }
}
