use serde::{Deserialize, Serialize};

use crate::forward::CauchyData;
use crate::quadrature::kronrod15;
use crate::{Error, Result, C64};

/// Largest tolerated relative L2 difference between the Dirichlet traces of two measurements.
pub const PSI_TOL: f64 = 1e-2;

/// One side of a measurement as a piecewise-linear profile in arclength.
struct Profile<'a> {
    s: &'a [f64],
    v: &'a [C64],
}

impl Profile<'_> {
    fn at(&self, t: f64) -> C64 {
        let s = self.s;
        let k = s.partition_point(|&x| x <= t);
        if k == 0 {
            return self.v[0];
        }
        if k >= s.len() {
            return self.v[s.len() - 1];
        }
        let (a, b) = (s[k - 1], s[k]);
        let w = if b > a { (t - a) / (b - a) } else { 0.0 };
        self.v[k - 1] * (1.0 - w) + self.v[k] * w
    }
}

/// `int |p - q|^2 ds` over one side, exact for piecewise-linear profiles on merged breakpoints.
fn side_l2_sq(p: &Profile, q: &Profile) -> f64 {
    let mut knots: Vec<f64> = p.s.iter().chain(q.s).copied().collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    knots
        .windows(2)
        .map(|w| {
            let (d0, d1) = (p.at(w[0]) - q.at(w[0]), p.at(w[1]) - q.at(w[1]));
            (w[1] - w[0]) / 3.0 * (d0.norm_sqr() + d1.norm_sqr() + (d0 * d1.conj()).re)
        })
        .sum()
}

fn zero_profile_sq(p: &Profile) -> f64 {
    let zero = [C64::new(0.0, 0.0); 2];
    let s = [p.s[0], p.s[p.s.len() - 1]];
    side_l2_sq(p, &Profile { s: &s, v: &zero })
}

fn profiles<'a>(d: &'a CauchyData, psi: bool) -> Vec<(usize, Profile<'a>)> {
    d.side_ranges()
        .into_iter()
        .map(|r| {
            let v = if psi { &d.psi[r.clone()] } else { &d.dnu[r.clone()] };
            (d.side[r.start], Profile { s: &d.arclen[r], v })
        })
        .collect()
}

/// Per-side pairing after checking that both measurements share the boundary layout.
fn paired<'a>(a: &'a CauchyData, b: &'a CauchyData, psi: bool) -> Result<Vec<(Profile<'a>, Profile<'a>)>> {
    let (pa, pb) = (profiles(a, psi), profiles(b, psi));
    if pa.len() != pb.len() {
        return Err(Error::MismatchedData(format!("{} sides against {}", pa.len(), pb.len())));
    }
    pa.into_iter()
        .zip(pb)
        .map(|((sa, p), (sb, q))| {
            let (la, lb) = (p.s[p.s.len() - 1], q.s[q.s.len() - 1]);
            if sa != sb || (la - lb).abs() > 1e-9 * la.max(lb) {
                return Err(Error::MismatchedData(format!("side {sa} does not match side {sb}")));
            }
            Ok((p, q))
        })
        .collect()
}

/// Norm in which two Neumann traces are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "type")]
pub enum GapNorm {
    /// Full boundary L2 norm.
    #[default]
    L2,
    /// L2 norm of the projection onto polynomials of degree `degree` on every side.
    /// Nodal fluxes carry O(h) mesh-scale noise that this filters out, while their smooth
    /// part converges like h^2.
    Moments { degree: usize },
}

/// Mean Dirichlet L2 norm of two measurements after checking that they share the same traces.
fn dirichlet_scale(a: &CauchyData, b: &CauchyData) -> Result<f64> {
    let psi = paired(a, b, true)?;
    let (mut dpsi, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (p, q) in &psi {
        dpsi += side_l2_sq(p, q);
        na += zero_profile_sq(p);
        nb += zero_profile_sq(q);
    }
    let scale = 0.5 * (na.sqrt() + nb.sqrt());
    if dpsi.sqrt() > PSI_TOL * scale.max(f64::MIN_POSITIVE) && dpsi > 0.0 {
        return Err(Error::MismatchedData(format!(
            "Dirichlet traces differ by {:.3e} relative",
            dpsi.sqrt() / scale
        )));
    }
    Ok(scale)
}

fn legendre(n: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return p0;
    }
    for k in 1..n {
        let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Orthonormal Legendre moments of the Neumann-trace difference `a - b`, side by side, each
/// divided by the Dirichlet scale. Their Euclidean norm is the `Moments` gap.
pub fn flux_moments(a: &CauchyData, b: &CauchyData, degree: usize) -> Result<Vec<C64>> {
    if degree > 20 {
        return Err(Error::Config(format!("moment degree {degree} exceeds 20")));
    }
    let scale = dirichlet_scale(a, b)?;
    let inv = if scale > 0.0 { 1.0 / scale } else { 1.0 };
    let mut out = Vec::new();
    for (p, q) in paired(a, b, false)? {
        let len = p.s[p.s.len() - 1];
        let mut knots: Vec<f64> = p.s.iter().chain(q.s).copied().collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        for n in 0..=degree {
            let m: C64 = knots
                .windows(2)
                .map(|w| kronrod15(|s| (p.at(s) - q.at(s)) * legendre(n, 2.0 * s / len - 1.0), w[0], w[1]))
                .sum();
            out.push(m * (((2 * n + 1) as f64 / len).sqrt() * inv));
        }
    }
    Ok(out)
}

/// Relative gap between the Neumann traces of two measurements in the chosen norm.
pub fn gap_in(a: &CauchyData, b: &CauchyData, norm: GapNorm) -> Result<f64> {
    match norm {
        GapNorm::L2 => cauchy_gap(a, b),
        GapNorm::Moments { degree } => {
            Ok(flux_moments(a, b, degree)?.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        }
    }
}

/// L2 norm of the difference of the Neumann traces, relative to the mean L2 norm of the
/// Dirichlet traces. Measurements may come from different meshes of the same outer polygon.
pub fn cauchy_gap(a: &CauchyData, b: &CauchyData) -> Result<f64> {
    let scale = dirichlet_scale(a, b)?;
    let flux: f64 = paired(a, b, false)?.iter().map(|(p, q)| side_l2_sq(p, q)).sum();
    if flux == 0.0 {
        return Ok(0.0);
    }
    Ok(if scale > 0.0 { flux.sqrt() / scale } else { flux.sqrt() })
}

/// Boundary L2 norm of the Dirichlet trace.
pub fn dirichlet_norm(d: &CauchyData) -> f64 {
    profiles(d, true).iter().map(|(_, p)| zero_profile_sq(p)).sum::<f64>().sqrt()
}

/// Neumann trace of `d` sampled at arclength `s` on `side`, by linear interpolation.
pub fn sample_flux(d: &CauchyData, side: usize, s: f64) -> Option<C64> {
    let r = d.side_ranges().into_iter().find(|r| d.side[r.start] == side)?;
    Some(Profile { s: &d.arclen[r.clone()], v: &d.dnu[r] }.at(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;

    fn data(s: Vec<f64>, psi: Vec<f64>, dnu: Vec<f64>) -> CauchyData {
        let n = s.len();
        CauchyData {
            nodes: (0..n).collect(),
            points: s.iter().map(|&x| Vec2::new(x, 0.0)).collect(),
            psi: psi.into_iter().map(|x| C64::new(x, 0.0)).collect(),
            dnu: dnu.into_iter().map(|x| C64::new(x, 0.0)).collect(),
            side: vec![0; n],
            arclen: s,
            mesh_size: 0.1,
        }
    }

    #[test]
    fn merged_breakpoints_are_exact() {
        // Flux 0 vs flux x on [0, 1]: ||x|| = 1/sqrt(3); psi = 1 has norm 1.
        let a = data(vec![0.0, 0.5, 1.0], vec![1.0; 3], vec![0.0; 3]);
        let b = data(vec![0.0, 0.3, 1.0], vec![1.0; 3], vec![0.0, 0.3, 1.0]);
        assert!((cauchy_gap(&a, &b).unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-14);
        assert_eq!(cauchy_gap(&b, &b).unwrap(), 0.0);
        let c = data(vec![0.0, 1.0], vec![2.0; 2], vec![0.0; 2]);
        assert!(matches!(cauchy_gap(&a, &c), Err(Error::MismatchedData(_))));
        assert!((sample_flux(&b, 0, 0.65).unwrap() - C64::new(0.65, 0.0)).norm() < 1e-15);
        // Degree 1 captures the linear difference exactly.
        let m = gap_in(&a, &b, GapNorm::Moments { degree: 1 }).unwrap();
        assert!((m - 1.0 / 3f64.sqrt()).abs() < 1e-14);
        // A mean-zero oscillation is invisible to degree 0.
        let z = data(vec![0.0, 0.25, 0.5, 0.75, 1.0], vec![1.0; 5], vec![0.0, 1.0, 0.0, -1.0, 0.0]);
        let zero = data(vec![0.0, 1.0], vec![1.0; 2], vec![0.0; 2]);
        assert!(gap_in(&z, &zero, GapNorm::Moments { degree: 0 }).unwrap() < 1e-15);
    }
}
