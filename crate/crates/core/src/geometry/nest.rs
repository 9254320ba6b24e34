use serde::{Deserialize, Serialize};

use super::polygon::ConvexPolygon;
use super::vector::segment_segment_distance;
use crate::{Error, Result};

/// Strictly nested convex layers, outermost first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestedPartition {
    pub layers: Vec<ConvexPolygon>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NestReport {
    /// `clearances[l]` is the boundary distance between layers `l` and `l + 1`,
    /// or zero when layer `l + 1` is not contained in layer `l`.
    pub clearances: Vec<f64>,
    pub contained: Vec<bool>,
    pub pass: bool,
}

impl NestedPartition {
    pub fn new(layers: Vec<ConvexPolygon>) -> Self {
        Self { layers }
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Validates and returns `self`, or a geometry error naming the offending layer.
    pub fn validated(self) -> Result<Self> {
        if self.layers.is_empty() {
            return Err(Error::Geometry("nest needs at least one layer".into()));
        }
        let r = validate_nest(&self);
        if let Some(l) = r.clearances.iter().position(|&c| !(c > 0.0)) {
            return Err(Error::Geometry(format!(
                "layer {} is not compactly contained in layer {l}",
                l + 1
            )));
        }
        Ok(self)
    }
}

/// Exact minimum distance between the boundaries of two polygons.
pub fn boundary_distance(a: &ConvexPolygon, b: &ConvexPolygon) -> f64 {
    let mut d = f64::INFINITY;
    for (p, q) in a.edges() {
        for (r, s) in b.edges() {
            d = d.min(segment_segment_distance(p, q, r, s));
        }
    }
    d
}

pub fn validate_nest(partition: &NestedPartition) -> NestReport {
    let mut clearances = Vec::new();
    let mut contained = Vec::new();
    for w in partition.layers.windows(2) {
        let (outer, inner) = (&w[0], &w[1]);
        let inside = inner.vertices().iter().all(|&v| outer.contains(v));
        let gap = boundary_distance(outer, inner);
        contained.push(inside && gap > 0.0);
        clearances.push(if inside { gap } else { 0.0 });
    }
    let pass = !partition.layers.is_empty() && clearances.iter().all(|&c| c > 0.0);
    NestReport { clearances, contained, pass }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;

    #[test]
    fn nested_squares() {
        let n = NestedPartition::new(vec![
            ConvexPolygon::unit_square(),
            ConvexPolygon::rectangle(0.25, 0.25, 0.75, 0.75).unwrap(),
        ]);
        let r = validate_nest(&n);
        assert!(r.pass);
        assert_eq!(r.clearances, vec![0.25]);
    }

    #[test]
    fn overlapping_squares_fail() {
        let n = NestedPartition::new(vec![
            ConvexPolygon::unit_square(),
            ConvexPolygon::rectangle(0.5, 0.5, 1.5, 1.5).unwrap(),
        ]);
        let r = validate_nest(&n);
        assert!(!r.pass);
        assert_eq!(r.clearances, vec![0.0]);
        assert!(n.validated().is_err());
    }

    #[test]
    fn touching_layer_has_zero_clearance() {
        let outer = ConvexPolygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        ])
        .unwrap();
        let inner = ConvexPolygon::new(vec![
            Vec2::new(0.1, 0.1),
            Vec2::new(0.5, 0.5),
            Vec2::new(0.1, 0.5),
        ])
        .unwrap();
        let r = validate_nest(&NestedPartition::new(vec![outer, inner]));
        assert!(!r.pass);
        assert_eq!(r.clearances[0], 0.0);
    }
}
