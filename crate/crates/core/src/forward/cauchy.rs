use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::content::ContentModel;
use super::solver::{weak_residual, FemField, Source};
use crate::geometry::Vec2;
use crate::{Error, Result, C64};

/// Boundary measurement: Dirichlet and Neumann traces at outer boundary nodes, side by side.
///
/// Sides are traversed counterclockwise; polygon vertices appear once at the end of one side
/// and again at the start of the next, carrying that side's one-sided flux.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CauchyData {
    pub nodes: Vec<usize>,
    pub points: Vec<Vec2>,
    #[serde(with = "crate::serde_cx::vec")]
    pub psi: Vec<C64>,
    #[serde(with = "crate::serde_cx::vec")]
    pub dnu: Vec<C64>,
    /// Outer polygon side of each entry.
    pub side: Vec<usize>,
    /// Distance from the starting vertex of the side.
    pub arclen: Vec<f64>,
    pub mesh_size: f64,
}

impl CauchyData {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Index ranges of the entries belonging to each side.
    pub fn side_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.len() {
            if i == self.len() || self.side[i] != self.side[start] {
                out.push(start..i);
                start = i;
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("node,x,y,re_psi,im_psi,re_dnu,im_dnu\n");
        for i in 0..self.len() {
            let (p, f, g) = (self.points[i], self.psi[i], self.dnu[i]);
            let _ = writeln!(s, "{},{},{},{},{},{},{}", self.nodes[i], p.x, p.y, f.re, f.im, g.re, g.im);
        }
        s
    }
}

/// Neumann trace by variationally consistent flux recovery.
///
/// The weak residual at a boundary node equals the boundary integral of the flux against the
/// node's hat function. On each side the flux is taken piecewise linear; the side-interior
/// equations form a tridiagonal system in which the two corner values are closed by linear
/// extrapolation from the two nearest interior values.
pub fn dirichlet_to_neumann(field: &FemField, content: &ContentModel, source: Source) -> Result<CauchyData> {
    let mesh = field.mesh();
    let r = weak_residual(field, content, source);
    let mut data = CauchyData {
        nodes: Vec::new(),
        points: Vec::new(),
        psi: Vec::new(),
        dnu: Vec::new(),
        side: Vec::new(),
        arclen: Vec::new(),
        mesh_size: mesh.mesh_size,
    };
    let edges = &mesh.boundary_edges;
    let mut start = 0;
    while start < edges.len() {
        let side = edges[start].side;
        let mut end = start;
        while end < edges.len() && edges[end].side == side {
            end += 1;
        }
        let run = &edges[start..end];
        let mut nodes: Vec<usize> = run.iter().map(|e| e.nodes[0]).collect();
        nodes.push(run[run.len() - 1].nodes[1]);
        let lens: Vec<f64> = run.iter().map(|e| mesh.nodes[e.nodes[0]].dist(mesh.nodes[e.nodes[1]])).collect();
        let rhs: Vec<C64> = nodes[1..nodes.len() - 1].iter().map(|&i| r[i]).collect();
        let g = side_flux(&lens, &rhs)
            .map_err(|e| Error::Mesh(format!("outer side {side}: {e}")))?;
        let origin = mesh.nodes[nodes[0]];
        for (k, &i) in nodes.iter().enumerate() {
            data.nodes.push(i);
            data.points.push(mesh.nodes[i]);
            data.psi.push(field.values[i]);
            data.dnu.push(g[k]);
            data.side.push(side);
            data.arclen.push(mesh.nodes[i].dist(origin));
        }
        start = end;
    }
    Ok(data)
}

/// Solves for nodal flux values `g_0..g_m` on one side with segment lengths `lens`
/// (`m = lens.len()`) given the `m - 1` interior load values.
fn side_flux(lens: &[f64], rhs: &[C64]) -> std::result::Result<Vec<C64>, String> {
    let m = lens.len();
    if m < 2 {
        return Err("needs at least one interior node".into());
    }
    if m == 2 {
        let g = rhs[0] / (0.5 * (lens[0] + lens[1]));
        return Ok(vec![g; 3]);
    }
    // Unknowns g_1..g_{m-1}; row k (0-based) is the equation at side node k + 1.
    let n = m - 1;
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    for k in 0..n {
        let (l0, l1) = (lens[k], lens[k + 1]);
        sub[k] = l0 / 6.0;
        diag[k] = (l0 + l1) / 3.0;
        sup[k] = l1 / 6.0;
    }
    // g_0 = (1 + r) g_1 - r g_2 with r = l_0 / l_1
    let r = lens[0] / lens[1];
    diag[0] += (1.0 + r) * sub[0];
    sup[0] -= r * sub[0];
    sub[0] = 0.0;
    // g_m = (1 + s) g_{m-1} - s g_{m-2} with s = l_{m-1} / l_{m-2}
    let s = lens[m - 1] / lens[m - 2];
    diag[n - 1] += (1.0 + s) * sup[n - 1];
    sub[n - 1] -= s * sup[n - 1];
    sup[n - 1] = 0.0;
    let inner = thomas(&sub, &diag, &sup, rhs)?;
    let mut g = Vec::with_capacity(m + 1);
    g.push(inner[0] * (1.0 + r) - inner[1] * r);
    g.extend_from_slice(&inner);
    g.push(inner[n - 1] * (1.0 + s) - inner[n - 2] * s);
    Ok(g)
}

fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[C64]) -> std::result::Result<Vec<C64>, String> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![C64::new(0.0, 0.0); n];
    let mut beta = diag[0];
    if beta == 0.0 {
        return Err("singular boundary mass system".into());
    }
    c[0] = sup[0] / beta;
    d[0] = rhs[0] / beta;
    for i in 1..n {
        beta = diag[i] - sub[i] * c[i - 1];
        if beta == 0.0 {
            return Err("singular boundary mass system".into());
        }
        c[i] = sup[i] / beta;
        d[i] = (rhs[i] - d[i - 1] * sub[i]) / beta;
    }
    for i in (0..n - 1).rev() {
        d[i] = d[i] - d[i + 1] * c[i];
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn side_flux_reproduces_linear_profiles() {
        let lens = [0.1, 0.25, 0.15, 0.2, 0.3];
        let xs: Vec<f64> = std::iter::once(0.0)
            .chain(lens.iter().scan(0.0, |s, l| {
                *s += l;
                Some(*s)
            }))
            .collect();
        let g = |x: f64| C64::new(1.0 + 2.0 * x, -x);
        // Load of a linear profile against interior hat functions.
        let rhs: Vec<C64> = (1..lens.len())
            .map(|k| {
                g(xs[k - 1]) * (lens[k - 1] / 6.0)
                    + g(xs[k]) * ((lens[k - 1] + lens[k]) / 3.0)
                    + g(xs[k + 1]) * (lens[k] / 6.0)
            })
            .collect();
        let out = side_flux(&lens, &rhs).unwrap();
        for (v, x) in out.iter().zip(&xs) {
            assert!((v - g(*x)).norm() < 1e-12);
        }
        assert!(side_flux(&[1.0], &[]).is_err());
    }
}
