//! P1 finite elements and Newton's method for `Delta u + a(x, u) = 0` with Dirichlet data.

mod boundary;
mod cauchy;
mod content;
mod solver;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use boundary::BoundaryData;
pub use cauchy::{dirichlet_to_neumann, CauchyData};
pub use content::{ContentClass, ContentModel};
pub use solver::{
    assemble_linearized, boundary_norm, boundary_norms, solve_semilinear, weak_residual, FemField, FemSpace,
    Solution, SolverOptions, Source, TRI_RULE,
};

use crate::Result;

/// Convenience: solve with boundary data and return the Cauchy data alongside.
pub fn measure(
    space: &FemSpace,
    content: &ContentModel,
    psi: &BoundaryData,
    opts: &SolverOptions,
) -> Result<(Solution, CauchyData)> {
    let sol = solve_semilinear(space, content, &|p| psi.eval(p), None, opts)?;
    let data = dirichlet_to_neumann(&sol.field, content, None)?;
    Ok((sol, data))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SmallDataRow {
    pub eps: f64,
    pub iterations: usize,
    pub final_residual: f64,
    pub u_norm: f64,
    pub psi_norm: f64,
    /// `||u|| / ||eps psi_0||` with the H1 surrogate over the boundary-norm surrogate.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SmallDataTable {
    pub rows: Vec<SmallDataRow>,
    pub spread: f64,
    pub max_spread: f64,
    pub pass: bool,
}

/// Solves with data `eps psi_0` for each `eps` and checks that `||u|| / ||psi||` stays bounded.
pub fn small_data_bound(
    space: &FemSpace,
    content: &ContentModel,
    psi0: &BoundaryData,
    eps_list: &[f64],
    opts: &SolverOptions,
    max_spread: f64,
) -> Result<SmallDataTable> {
    let rows = eps_list
        .par_iter()
        .map(|&eps| {
            let psi = psi0.scaled(eps);
            let f = |p| psi.eval(p);
            let sol = solve_semilinear(space, content, &f, None, opts)?;
            let u_norm = sol.field.h1_norm();
            let psi_norm = boundary_norm(&space.mesh, &f);
            Ok(SmallDataRow {
                eps,
                iterations: sol.iterations,
                final_residual: *sol.history.last().unwrap_or(&0.0),
                u_norm,
                psi_norm,
                ratio: if psi_norm > 0.0 { u_norm / psi_norm } else { 0.0 },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ratios = rows.iter().map(|r| r.ratio).filter(|r| *r > 0.0);
    let (lo, hi) = ratios.fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r), hi.max(r)));
    let spread = if hi > 0.0 { hi / lo } else { 1.0 };
    Ok(SmallDataTable { rows, spread, max_spread, pass: spread < max_spread })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ConvexPolygon, Vec2};
    use crate::mesh::triangulate;
    use crate::C64;
    use std::f64::consts::PI;

    fn square_space(h: f64, interfaces: &[ConvexPolygon]) -> FemSpace {
        FemSpace::new(triangulate(&ConvexPolygon::unit_square(), interfaces, h).unwrap())
    }

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let inner = ConvexPolygon::rectangle(0.3, 0.3, 0.7, 0.7).unwrap();
        let space = square_space(0.2, std::slice::from_ref(&inner));
        let content = ContentModel::single(c(2.0), vec![c(1.0), c(3.0)]).unwrap();
        let sol = solve_semilinear(&space, &content, &|_| c(0.0), None, &SolverOptions::default()).unwrap();
        assert_eq!(sol.iterations, 0);
        assert!(sol.field.values.iter().all(|v| *v == c(0.0)));
    }

    #[test]
    fn linear_field_and_flux_are_exact() {
        let space = square_space(0.15, &[]);
        let content = ContentModel { background: c(0.0), layers: vec![], class: ContentClass::SingleLayer };
        let sol = solve_semilinear(&space, &content, &|p| c(p.x), None, &SolverOptions::default()).unwrap();
        for (p, v) in space.mesh.nodes.iter().zip(&sol.field.values) {
            assert!((v - c(p.x)).norm() < 1e-12);
        }
        let data = dirichlet_to_neumann(&sol.field, &content, None).unwrap();
        let normals = [Vec2::new(0.0, -1.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(-1.0, 0.0)];
        for i in 0..data.len() {
            assert!((data.dnu[i] - c(normals[data.side[i]].x)).norm() < 1e-10, "{:?}", data.dnu[i]);
        }
    }

    #[test]
    fn linearized_matrix_at_unit_field() {
        let space = square_space(0.5, &[]);
        let mut field = FemField::zeros(&space);
        field.values.iter_mut().for_each(|v| *v = c(1.0));
        let quad = ContentModel { background: c(0.0), layers: vec![], class: ContentClass::SingleLayer };
        let k = assemble_linearized(&field, &quad);
        let mut q2 = quad.clone();
        q2.background = c(3.0);
        let km = assemble_linearized(&field, &q2);
        // K - 3M: row sums of M equal the hat-function integrals, so row sums differ by 3 * area share.
        let total: C64 = (0..space.n()).flat_map(|i| space.pattern.row(i).iter().map(move |&j| (i, j)))
            .map(|(i, j)| k.get(i, j) - km.get(i, j))
            .sum();
        assert!((total - c(3.0)).norm() < 1e-12);
    }

    #[test]
    fn manufactured_rate_with_semilinear_content() {
        // u* = eps sin(pi x) sin(pi y); source makes it exact for a = 2u + 5u^2 inside, u outside.
        let inner = ConvexPolygon::rectangle(0.25, 0.25, 0.75, 0.75).unwrap();
        let content = ContentModel::single(c(1.0), vec![c(2.0), c(5.0)]).unwrap();
        let eps = 0.3;
        let exact = move |p: Vec2| c(eps * (PI * p.x).sin() * (PI * p.y).sin());
        let interfaces = [inner.clone()];
        let src = move |p: Vec2| {
            let u = exact(p);
            let region = crate::mesh::TriMesh::classify(&interfaces, p);
            u * (2.0 * PI * PI) - content_eval(region, u)
        };
        fn content_eval(region: usize, u: C64) -> C64 {
            if region == 0 {
                u
            } else {
                u * 2.0 + u * u * 5.0
            }
        }
        let mut mesh = triangulate(&ConvexPolygon::unit_square(), &[inner], 0.2).unwrap();
        let mut errs = Vec::new();
        for _ in 0..4 {
            let space = FemSpace::new(mesh.clone());
            let sol = solve_semilinear(&space, &content, &exact, Some(&src), &SolverOptions::default()).unwrap();
            assert!(sol.iterations >= 1);
            errs.push(sol.field.l2_error(exact));
            mesh = mesh.refine();
        }
        for w in errs.windows(2) {
            let rate = (w[0] / w[1]).log2();
            assert!((rate - 2.0).abs() < 0.2, "rates from {errs:?}");
        }
    }
}
