use std::collections::HashMap;

use super::{Anchor, BoundaryEdge, TriMesh};

impl TriMesh {
    /// Uniform red refinement: every triangle splits into four at its edge midpoints.
    pub fn refine(&self) -> TriMesh {
        let mut sides = vec![self.outer.len()];
        sides.extend(self.interfaces.iter().map(|p| p.len()));
        let mut nodes = self.nodes.clone();
        let mut anchors = self.anchors.clone();
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, nodes: &mut Vec<_>, anchors: &mut Vec<Anchor>| -> usize {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                nodes.push((self.nodes[a] + self.nodes[b]) * 0.5);
                anchors.push(Anchor::midpoint(self.anchors[a], self.anchors[b], &sides));
                nodes.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        let mut regions = Vec::with_capacity(4 * self.triangles.len());
        for (t, &[a, b, c]) in self.triangles.iter().enumerate() {
            let ab = midpoint(a, b, &mut nodes, &mut anchors);
            let bc = midpoint(b, c, &mut nodes, &mut anchors);
            let ca = midpoint(c, a, &mut nodes, &mut anchors);
            triangles.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
            regions.extend([self.regions[t]; 4]);
        }
        let boundary_edges = self
            .boundary_edges
            .iter()
            .flat_map(|e| {
                let m = midpoint(e.nodes[0], e.nodes[1], &mut nodes, &mut anchors);
                [
                    BoundaryEdge { nodes: [e.nodes[0], m], ..*e },
                    BoundaryEdge { nodes: [m, e.nodes[1]], ..*e },
                ]
            })
            .collect();
        TriMesh {
            nodes,
            triangles,
            regions,
            boundary_edges,
            mesh_size: 0.5 * self.mesh_size,
            anchors,
            outer: self.outer.clone(),
            interfaces: self.interfaces.clone(),
        }
    }
}
