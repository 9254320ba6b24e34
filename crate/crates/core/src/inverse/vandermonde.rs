use serde::{Deserialize, Serialize};

use crate::linalg::{cond1, DenseMatrix};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CoefficientRecovery {
    #[serde(with = "crate::serde_cx::vec")]
    pub coefficients: Vec<C64>,
    /// 1-norm condition number of the matrix `[u_i^j]`.
    pub condition: f64,
}

/// Values `sum_j c_j u_i^j` (`j = 1..N`) for the forward map of the recovery.
pub fn forward_vandermonde(apex: &[C64], coeffs: &[C64]) -> Vec<C64> {
    apex.iter()
        .map(|&u| coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| (acc + c) * u))
        .collect()
}

/// Solves `sum_{j=1}^N c_j u_i^j = g_i` for `c`.
///
/// Dividing row `i` by `u_i` leaves a classical Vandermonde system in `u_i`, which is
/// solved by Newton divided differences followed by conversion to monomial coefficients.
pub fn recover_coefficients(apex: &[C64], gaps: &[C64]) -> Result<CoefficientRecovery> {
    let n = apex.len();
    if n == 0 || gaps.len() != n {
        return Err(Error::Dimension(format!("{n} apex values against {} gap values", gaps.len())));
    }
    let scale = apex.iter().map(|u| u.norm()).fold(0.0, f64::max);
    let tol = 1e-14 * scale;
    for (i, u) in apex.iter().enumerate() {
        if u.norm() <= tol {
            return Err(Error::VandermondeSingular(format!("apex value u_{} vanishes", i + 1)));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if (apex[j] - apex[i]).norm() <= tol {
                return Err(Error::VandermondeSingular(format!(
                    "factor u_{} - u_{} of the distinctness product vanishes",
                    j + 1,
                    i + 1
                )));
            }
        }
    }
    let x = apex;
    let mut a: Vec<C64> = gaps.iter().zip(apex).map(|(g, u)| g / u).collect();
    // Divided differences.
    for k in 0..n {
        for i in (k + 1..n).rev() {
            a[i] = (a[i] - a[i - 1]) / (x[i] - x[i - k - 1]);
        }
    }
    // Newton form to monomial form.
    for k in (0..n.saturating_sub(1)).rev() {
        for i in k..n - 1 {
            let next = a[i + 1];
            a[i] -= next * x[k];
        }
    }
    let m = DenseMatrix::from_rows(
        &apex.iter().map(|&u| (1..=n).map(|j| u.powi(j as i32)).collect()).collect::<Vec<_>>(),
    )?;
    Ok(CoefficientRecovery { coefficients: a, condition: cond1(&m) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn two_by_two_against_closed_form() {
        let (l1, l2) = (3.0, -7.0);
        let u = [c(0.1), c(0.2)];
        let g = forward_vandermonde(&u, &[c(l1), c(l2)]);
        // [u1 u1^2; u2 u2^2]^-1 by Cramer's rule.
        let det = u[0] * u[1] * u[1] - u[1] * u[0] * u[0];
        let e1 = (g[0] * u[1] * u[1] - g[1] * u[0] * u[0]) / det;
        let e2 = (u[0] * g[1] - u[1] * g[0]) / det;
        let r = recover_coefficients(&u, &g).unwrap();
        assert!((r.coefficients[0] - e1).norm() < 1e-10 && (r.coefficients[1] - e2).norm() < 1e-10);
        assert!((r.coefficients[0] - c(l1)).norm() < 1e-10);
    }

    #[test]
    fn scalar_and_singular_cases() {
        let r = recover_coefficients(&[c(0.5)], &[c(2.0)]).unwrap();
        assert_eq!(r.coefficients, vec![c(4.0)]);
        assert!(matches!(recover_coefficients(&[c(0.1), c(0.1)], &[c(1.0), c(1.0)]), Err(Error::VandermondeSingular(_))));
        assert!(matches!(recover_coefficients(&[c(0.0), c(0.1)], &[c(1.0), c(1.0)]), Err(Error::VandermondeSingular(_))));
    }
}
