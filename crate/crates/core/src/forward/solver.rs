use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::content::ContentModel;
use crate::geometry::Vec2;
use crate::linalg::{rcm_ordering, BandLu, CsrMatrix, SparsePattern};
use crate::mesh::TriMesh;
use crate::{Error, Result, C64};

/// Six-point degree-4 rule on the reference triangle: barycentric points and weights summing to 1.
pub const TRI_RULE: [([f64; 3], f64); 6] = [
    ([0.445948490915965, 0.445948490915965, 0.108103018168070], 0.223381589678011),
    ([0.445948490915965, 0.108103018168070, 0.445948490915965], 0.223381589678011),
    ([0.108103018168070, 0.445948490915965, 0.445948490915965], 0.223381589678011),
    ([0.091576213509771, 0.091576213509771, 0.816847572980459], 0.109951743655322),
    ([0.091576213509771, 0.816847572980459, 0.091576213509771], 0.109951743655322),
    ([0.816847572980459, 0.091576213509771, 0.091576213509771], 0.109951743655322),
];

/// Mesh plus the structures shared by every solve on it.
#[derive(Debug, Clone)]
pub struct FemSpace {
    pub mesh: Arc<TriMesh>,
    pub pattern: Arc<SparsePattern>,
    /// Bandwidth-reducing ordering reused by every factorization.
    pub perm: Arc<Vec<usize>>,
    pub is_boundary: Vec<bool>,
}

impl FemSpace {
    pub fn new(mesh: TriMesh) -> Self {
        Self::from_arc(Arc::new(mesh))
    }

    pub fn from_arc(mesh: Arc<TriMesh>) -> Self {
        let pattern = Arc::new(SparsePattern::from_elements(mesh.nodes.len(), &mesh.triangles));
        let perm = Arc::new(rcm_ordering(&pattern));
        let is_boundary = mesh.is_boundary_node();
        Self { mesh, pattern, perm, is_boundary }
    }

    pub fn n(&self) -> usize {
        self.mesh.nodes.len()
    }

    pub fn factor(&self, a: &CsrMatrix) -> Result<BandLu> {
        BandLu::factor_with(a, self.perm.as_ref().clone())
    }

    /// Stiffness plus mass matrix, for H1 norms.
    fn h1_form(&self, u: &[C64]) -> f64 {
        let m = &self.mesh;
        let mut s = 0.0;
        for t in 0..m.triangles.len() {
            let (g, area) = m.shape_gradients(t);
            let tri = m.triangles[t];
            for i in 0..3 {
                for j in 0..3 {
                    let mass = if i == j { area / 6.0 } else { area / 12.0 };
                    s += ((u[tri[i]].conj() * u[tri[j]]) * (area * g[i].dot(g[j]) + mass)).re;
                }
            }
        }
        s.max(0.0)
    }
}

/// Nodal P1 field.
#[derive(Debug, Clone)]
pub struct FemField {
    pub space: FemSpace,
    pub values: Vec<C64>,
}

impl FemField {
    pub fn zeros(space: &FemSpace) -> Self {
        Self { space: space.clone(), values: vec![C64::new(0.0, 0.0); space.n()] }
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.space.mesh
    }

    pub fn h1_norm(&self) -> f64 {
        self.space.h1_form(&self.values).sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        let m = self.mesh();
        let mut s = 0.0;
        for (t, tri) in m.triangles.iter().enumerate() {
            let area = m.area(t);
            for (l, w) in TRI_RULE {
                let v = self.values[tri[0]] * l[0] + self.values[tri[1]] * l[1] + self.values[tri[2]] * l[2];
                s += w * area * v.norm_sqr();
            }
        }
        s.sqrt()
    }

    /// L2 distance to an analytic field, by the degree-4 rule.
    pub fn l2_error<F: Fn(Vec2) -> C64>(&self, exact: F) -> f64 {
        let m = self.mesh();
        let mut s = 0.0;
        for (t, tri) in m.triangles.iter().enumerate() {
            let area = m.area(t);
            let (pa, pb, pc) = (m.nodes[tri[0]], m.nodes[tri[1]], m.nodes[tri[2]]);
            for (l, w) in TRI_RULE {
                let x = pa * l[0] + pb * l[1] + pc * l[2];
                let v = self.values[tri[0]] * l[0] + self.values[tri[1]] * l[1] + self.values[tri[2]] * l[2];
                s += w * area * (v - exact(x)).norm_sqr();
            }
        }
        s.sqrt()
    }

    pub fn interpolate(&self, p: Vec2) -> Option<C64> {
        let (t, l) = self.mesh().locate(p)?;
        let tri = self.mesh().triangles[t];
        Some(self.values[tri[0]] * l[0] + self.values[tri[1]] * l[1] + self.values[tri[2]] * l[2])
    }

    pub fn sub(&self, other: &FemField) -> Result<FemField> {
        if !Arc::ptr_eq(&self.space.mesh, &other.space.mesh) && *self.space.mesh != *other.space.mesh {
            return Err(Error::Dimension("fields live on different meshes".into()));
        }
        Ok(FemField {
            space: self.space.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct SolverOptions {
    pub newton_tol: f64,
    pub max_iter: usize,
    /// Smallness threshold on the boundary-data norm surrogate.
    pub delta: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { newton_tol: 1e-10, max_iter: 20, delta: f64::INFINITY }
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub field: FemField,
    /// Newton corrections applied after the initial linear solve.
    pub iterations: usize,
    /// Relative residual of the initial iterate and after each correction.
    pub history: Vec<f64>,
}

/// Optional volume source `s(x)` added to the content.
pub type Source<'a> = Option<&'a (dyn Fn(Vec2) -> C64 + Sync)>;

struct Assembled {
    /// Weak residual `int grad u . grad phi_i - int (a(u) + s) phi_i` for every node.
    residual: Vec<C64>,
    scale: f64,
    jacobian: Option<CsrMatrix>,
}

fn assemble(space: &FemSpace, content: &ContentModel, u: &[C64], source: Source, want_jacobian: bool) -> Assembled {
    let m = &space.mesh;
    let mut residual = vec![C64::new(0.0, 0.0); space.n()];
    let mut stiff = vec![C64::new(0.0, 0.0); space.n()];
    let mut load = vec![C64::new(0.0, 0.0); space.n()];
    // Sums of absolute contributions, so cancellation in an exact solve does not shrink the scale.
    let mut stiff_abs = vec![0.0; space.n()];
    let mut load_abs = vec![0.0; space.n()];
    let mut jac = want_jacobian.then(|| CsrMatrix::zeros(space.pattern.clone()));
    for t in 0..m.triangles.len() {
        let (g, area) = m.shape_gradients(t);
        let tri = m.triangles[t];
        let region = m.regions[t];
        for i in 0..3 {
            for j in 0..3 {
                let k = area * g[i].dot(g[j]);
                stiff[tri[i]] += u[tri[j]] * k;
                stiff_abs[tri[i]] += (u[tri[j]] * k).norm();
                if let Some(jm) = jac.as_mut() {
                    jm.add(tri[i], tri[j], C64::new(k, 0.0));
                }
            }
        }
        let (pa, pb, pc) = (m.nodes[tri[0]], m.nodes[tri[1]], m.nodes[tri[2]]);
        for (l, w) in TRI_RULE {
            let uq = u[tri[0]] * l[0] + u[tri[1]] * l[1] + u[tri[2]] * l[2];
            let mut f = content.eval(region, uq);
            if let Some(s) = source {
                f += s(pa * l[0] + pb * l[1] + pc * l[2]);
            }
            let wa = w * area;
            for i in 0..3 {
                load[tri[i]] += f * (wa * l[i]);
                load_abs[tri[i]] += f.norm() * wa * l[i];
            }
            if let Some(jm) = jac.as_mut() {
                let da = content.derivative(region, uq);
                for i in 0..3 {
                    for j in 0..3 {
                        jm.add(tri[i], tri[j], -da * (wa * l[i] * l[j]));
                    }
                }
            }
        }
    }
    let mut s_stiff = 0.0;
    let mut s_load = 0.0;
    for i in 0..space.n() {
        residual[i] = stiff[i] - load[i];
        if !space.is_boundary[i] {
            s_stiff += stiff_abs[i] * stiff_abs[i];
            s_load += load_abs[i] * load_abs[i];
        }
    }
    Assembled { residual, scale: s_stiff.sqrt() + s_load.sqrt(), jacobian: jac }
}

fn interior_residual(a: &Assembled, space: &FemSpace) -> f64 {
    let r: f64 = a
        .residual
        .iter()
        .zip(&space.is_boundary)
        .filter(|(_, &b)| !b)
        .map(|(r, _)| r.norm_sqr())
        .sum::<f64>()
        .sqrt();
    if r == 0.0 {
        0.0
    } else if a.scale > 0.0 {
        r / a.scale
    } else {
        f64::INFINITY
    }
}

/// Weak residual at every node; boundary entries carry the flux functional.
pub fn weak_residual(field: &FemField, content: &ContentModel, source: Source) -> Vec<C64> {
    assemble(&field.space, content, &field.values, source, false).residual
}

/// Matrix of the linearization `v -> Delta v + d_u a(x, u) v` in weak form (`K - M[d_u a]`),
/// without boundary elimination.
pub fn assemble_linearized(field: &FemField, content: &ContentModel) -> CsrMatrix {
    assemble(&field.space, content, &field.values, None, true).jacobian.expect("requested")
}

/// Norm surrogate `(||psi||_0^2 + ||psi||_0 |psi|_1)^(1/2)` on the outer boundary.
pub fn boundary_norm(mesh: &TriMesh, psi: &dyn Fn(Vec2) -> C64) -> f64 {
    let (l2, semi) = boundary_norms(mesh, psi);
    (l2 * l2 + l2 * semi).sqrt()
}

/// Boundary L2 norm and tangential H1 seminorm of the P1 interpolant.
pub fn boundary_norms(mesh: &TriMesh, psi: &dyn Fn(Vec2) -> C64) -> (f64, f64) {
    let mut l2 = 0.0;
    let mut semi = 0.0;
    for e in &mesh.boundary_edges {
        let (a, b) = (mesh.nodes[e.nodes[0]], mesh.nodes[e.nodes[1]]);
        let len = a.dist(b);
        let (fa, fb) = (psi(a), psi(b));
        l2 += len / 3.0 * (fa.norm_sqr() + fb.norm_sqr() + (fa * fb.conj()).re);
        semi += (fb - fa).norm_sqr() / len;
    }
    (l2.sqrt(), semi.sqrt())
}

/// Newton solve of `Delta u + a(x, u) + s(x) = 0`, `u = psi` on the boundary, started
/// from the solution of the problem linearized at zero.
pub fn solve_semilinear(
    space: &FemSpace,
    content: &ContentModel,
    psi: &dyn Fn(Vec2) -> C64,
    source: Source,
    opts: &SolverOptions,
) -> Result<Solution> {
    let mesh = &space.mesh;
    if content.layers.len() != mesh.interfaces.len() {
        return Err(Error::Dimension(format!(
            "content has {} layers but the mesh has {} interfaces",
            content.layers.len(),
            mesh.interfaces.len()
        )));
    }
    content.validate()?;
    let norm = boundary_norm(mesh, psi);
    if norm > opts.delta {
        return Err(Error::DataTooLarge { norm, threshold: opts.delta });
    }
    let n = space.n();
    let zero = vec![C64::new(0.0, 0.0); n];
    let bvals: Vec<C64> = (0..n)
        .map(|i| if space.is_boundary[i] { psi(mesh.nodes[i]) } else { C64::new(0.0, 0.0) })
        .collect();

    // Initial iterate: linearization at zero, which is the whole problem when content is linear.
    let lin = assemble(space, content, &zero, source, true);
    let mut a0 = lin.jacobian.expect("requested");
    let mut rhs: Vec<C64> = lin.residual.iter().map(|r| -r).collect();
    for i in 0..n {
        if space.is_boundary[i] {
            a0.set_identity_row(i);
            rhs[i] = bvals[i];
        }
    }
    let mut u = space.factor(&a0)?.solve(&rhs);
    for i in 0..n {
        if space.is_boundary[i] {
            u[i] = bvals[i];
        }
    }

    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        let asm = assemble(space, content, &u, source, true);
        let r = interior_residual(&asm, space);
        history.push(r);
        if !r.is_finite() {
            return Err(Error::NewtonDivergence { iterations, history });
        }
        if r <= opts.newton_tol {
            break;
        }
        if iterations >= opts.max_iter {
            return Err(Error::NewtonDivergence { iterations, history });
        }
        let mut jac = asm.jacobian.expect("requested");
        let mut rhs: Vec<C64> = asm.residual.iter().map(|r| -r).collect();
        for i in 0..n {
            if space.is_boundary[i] {
                jac.set_identity_row(i);
                rhs[i] = C64::new(0.0, 0.0);
            }
        }
        let du = space.factor(&jac)?.solve(&rhs);
        for i in 0..n {
            u[i] += du[i];
        }
        iterations += 1;
    }
    Ok(Solution { field: FemField { space: space.clone(), values: u }, iterations, history })
}
