//! Globally adaptive Gauss–Kronrod (7/15) quadrature for complex integrands.

use crate::{Error, Result, C64};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 0.0, rel_tol: 1e-10, max_intervals: 2000 }
    }
}

impl QuadOptions {
    pub fn rel(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }

    /// Options for an inner integral of a nested rule.
    fn inner(&self) -> Self {
        Self { abs_tol: self.abs_tol * 0.1, rel_tol: self.rel_tol * 0.1, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: C64,
    pub error: f64,
    pub evaluations: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: C64,
    error: f64,
}

fn gk15<F>(f: &mut F, a: f64, b: f64) -> Result<(C64, f64)>
where
    F: FnMut(f64) -> Result<C64>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x)? + f(c + x)?;
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    Ok((kron * h, ((kron - gauss) * h).norm()))
}

/// Fixed 15-point Kronrod rule; exact for polynomials up to degree 22.
pub(crate) fn kronrod15<F: FnMut(f64) -> C64>(mut f: F, a: f64, b: f64) -> C64 {
    gk15(&mut |x| Ok(f(x)), a, b).map(|r| r.0).unwrap_or_default()
}

/// Adaptive integral of a fallible integrand over `[a, b]`.
pub fn try_integrate<F>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<C64>,
{
    if a == b {
        return Ok(QuadResult { value: C64::new(0.0, 0.0), error: 0.0, evaluations: 0 });
    }
    let (value, error) = gk15(&mut f, a, b)?;
    let mut segs = vec![Segment { a, b, value, error }];
    let mut evaluations = 15;
    loop {
        let total: C64 = segs.iter().map(|s| s.value).sum();
        let err: f64 = segs.iter().map(|s| s.error).sum();
        let tol = opts.abs_tol.max(opts.rel_tol * total.norm());
        if !total.re.is_finite() || !total.im.is_finite() {
            return Err(Error::Quadrature { tolerance: tol, estimate: f64::INFINITY });
        }
        if err <= tol {
            return Ok(QuadResult { value: total, error: err, evaluations });
        }
        if segs.len() >= opts.max_intervals {
            return Err(Error::Quadrature { tolerance: tol, estimate: err });
        }
        let worst = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("nonempty");
        let s = segs.swap_remove(worst);
        let m = 0.5 * (s.a + s.b);
        if m <= s.a.min(s.b) || m >= s.a.max(s.b) {
            // Interval cannot be split further in floating point.
            return Err(Error::Quadrature { tolerance: tol, estimate: err });
        }
        let (v1, e1) = gk15(&mut f, s.a, m)?;
        let (v2, e2) = gk15(&mut f, m, s.b)?;
        evaluations += 30;
        segs.push(Segment { a: s.a, b: m, value: v1, error: e1 });
        segs.push(Segment { a: m, b: s.b, value: v2, error: e2 });
    }
}

pub fn integrate<F>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> C64,
{
    try_integrate(|x| Ok(f(x)), a, b, opts)
}

pub fn integrate_real<F>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    Ok(integrate(|x| C64::new(f(x), 0.0), a, b, opts)?.value.re)
}

/// Integral over `[a, inf)` via the map `x = a + t / (1 - t)`.
pub fn integrate_semi_infinite<F>(f: F, a: f64, opts: QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> C64,
{
    try_integrate(
        |t| {
            let s = 1.0 - t;
            let v = f(a + t / s);
            Ok(if v.norm() == 0.0 { v } else { v / (s * s) })
        },
        0.0,
        1.0,
        opts,
    )
}

/// Iterated integral `int_a^b int_{lo(x)}^{hi(x)} f(x, y) dy dx`.
pub fn integrate_2d<F, L, H>(f: F, a: f64, b: f64, lo: L, hi: H, opts: QuadOptions) -> Result<C64>
where
    F: Fn(f64, f64) -> C64,
    L: Fn(f64) -> f64,
    H: Fn(f64) -> f64,
{
    let inner = opts.inner();
    Ok(try_integrate(|x| Ok(integrate(|y| f(x, y), lo(x), hi(x), inner)?.value), a, b, opts)?.value)
}

/// Iterated integral over a box.
pub fn integrate_3d<F>(f: F, x: (f64, f64), y: (f64, f64), z: (f64, f64), opts: QuadOptions) -> Result<C64>
where
    F: Fn(f64, f64, f64) -> C64,
{
    let mid = opts.inner();
    let inner = mid.inner();
    Ok(try_integrate(
        |a| {
            Ok(try_integrate(|b| Ok(integrate(|c| f(a, b, c), z.0, z.1, inner)?.value), y.0, y.1, mid)?.value)
        },
        x.0,
        x.1,
        opts,
    )?
    .value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate_real(|x| x.powi(7) - 3.0 * x * x, -1.0, 2.0, QuadOptions::default()).unwrap();
        let exact = (2f64.powi(8) - 1.0) / 8.0 - (8.0 + 1.0);
        assert!((r - exact).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_exponential() {
        // int_0^1 e^{(-50 + 80i) x} dx = (e^{mu} - 1) / mu
        let mu = C64::new(-50.0, 80.0);
        let r = integrate(|x| (mu * x).exp(), 0.0, 1.0, QuadOptions::rel(1e-12)).unwrap();
        let exact = (mu.exp() - 1.0) / mu;
        assert!((r.value - exact).norm() / exact.norm() < 1e-11);
    }

    #[test]
    fn semi_infinite_gamma() {
        let r = integrate_semi_infinite(|x| C64::new(x * x * (-x).exp(), 0.0), 0.0, QuadOptions::rel(1e-12)).unwrap();
        assert!((r.value.re - 2.0).abs() < 1e-11);
    }

    #[test]
    fn disc_area() {
        let a = integrate_2d(
            |_, _| C64::new(1.0, 0.0),
            -1.0,
            1.0,
            |x| -(1.0 - x * x).max(0.0).sqrt(),
            |x| (1.0 - x * x).max(0.0).sqrt(),
            QuadOptions::rel(1e-9),
        )
        .unwrap();
        assert!((a.re - std::f64::consts::PI).abs() < 1e-8);
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let opts = QuadOptions { abs_tol: 0.0, rel_tol: 1e-14, max_intervals: 3 };
        assert!(matches!(
            integrate_real(|x| x.abs().sqrt().recip(), 1e-300, 1.0, opts),
            Err(Error::Quadrature { .. })
        ));
    }
}
