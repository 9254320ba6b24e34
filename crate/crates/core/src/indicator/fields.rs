use crate::forward::FemField;
use crate::geometry::{TruncatedCorner, Vec2, Vec3};
use crate::{Error, Result, C64};

/// Complex scalar field with gradient, evaluated in 3D coordinates (planar fields ignore `z`).
pub trait Field: Sync {
    fn value(&self, x: Vec3) -> Result<C64>;
    fn gradient(&self, x: Vec3) -> Result<[C64; 3]>;

    fn normal_derivative(&self, x: Vec3, n: Vec3) -> Result<C64> {
        let g = self.gradient(x)?;
        Ok(g[0] * n.x + g[1] * n.y + g[2] * n.z)
    }
}

/// Field from closures.
pub struct FnField<V, G> {
    pub value: V,
    pub gradient: G,
}

impl<V, G> Field for FnField<V, G>
where
    V: Fn(Vec3) -> C64 + Sync,
    G: Fn(Vec3) -> [C64; 3] + Sync,
{
    fn value(&self, x: Vec3) -> Result<C64> {
        Ok((self.value)(x))
    }
    fn gradient(&self, x: Vec3) -> Result<[C64; 3]> {
        Ok((self.gradient)(x))
    }
}

/// `amplitude exp(i k dir . x)`, solving `Delta v + k^2 v = 0`.
#[derive(Debug, Clone, Copy)]
pub struct PlaneWave {
    pub amplitude: C64,
    pub k: f64,
    pub dir: Vec3,
}

impl Field for PlaneWave {
    fn value(&self, x: Vec3) -> Result<C64> {
        Ok(self.amplitude * C64::new(0.0, self.k * self.dir.dot(x)).exp())
    }
    fn gradient(&self, x: Vec3) -> Result<[C64; 3]> {
        let v = self.value(x)? * C64::new(0.0, self.k);
        Ok([v * self.dir.x, v * self.dir.y, v * self.dir.z])
    }
}

/// `a + b`, or `a - b` when `negate` is set.
pub struct FieldDiff<'a> {
    pub a: &'a dyn Field,
    pub b: &'a dyn Field,
    pub negate: bool,
}

impl<'a> FieldDiff<'a> {
    pub fn sum(a: &'a dyn Field, b: &'a dyn Field) -> Self {
        Self { a, b, negate: false }
    }
    pub fn diff(a: &'a dyn Field, b: &'a dyn Field) -> Self {
        Self { a, b, negate: true }
    }
}

impl Field for FieldDiff<'_> {
    fn value(&self, x: Vec3) -> Result<C64> {
        let (a, b) = (self.a.value(x)?, self.b.value(x)?);
        Ok(if self.negate { a - b } else { a + b })
    }
    fn gradient(&self, x: Vec3) -> Result<[C64; 3]> {
        let (a, b) = (self.a.gradient(x)?, self.b.gradient(x)?);
        let s = if self.negate { -1.0 } else { 1.0 };
        Ok([a[0] + b[0] * s, a[1] + b[1] * s, a[2] + b[2] * s])
    }
}

/// `f(R^{-1}(x - t))` for a planar rigid motion `x -> R x + t` about the origin.
pub struct ShiftedField<'a> {
    pub inner: &'a dyn Field,
    pub angle: f64,
    pub shift: Vec2,
}

impl ShiftedField<'_> {
    fn pull(&self, x: Vec3) -> Vec3 {
        (x.xy() - self.shift).rotate(-self.angle).to_3d()
    }
}

impl Field for ShiftedField<'_> {
    fn value(&self, x: Vec3) -> Result<C64> {
        self.inner.value(self.pull(x))
    }
    fn gradient(&self, x: Vec3) -> Result<[C64; 3]> {
        let g = self.inner.gradient(self.pull(x))?;
        let (c, s) = (self.angle.cos(), self.angle.sin());
        Ok([g[0] * c - g[1] * s, g[0] * s + g[1] * c, g[2]])
    }
}

/// `w = c r^2 / (2n) + kappa r^(alpha+2) / ((alpha+2)(alpha+n))` with `r = |x - apex|`,
/// so that `Delta w = c + kappa r^alpha` and `w(apex) = 0`.
#[derive(Debug, Clone, Copy)]
pub struct RadialBump {
    pub apex: Vec3,
    pub dim: usize,
    pub c: C64,
    pub kappa: C64,
    pub alpha: f64,
}

impl RadialBump {
    pub fn laplacian(&self, x: Vec3) -> C64 {
        let r = (x - self.apex).norm();
        self.c + self.kappa * r.powf(self.alpha)
    }
}

impl Field for RadialBump {
    fn value(&self, x: Vec3) -> Result<C64> {
        let n = self.dim as f64;
        let r = (x - self.apex).norm();
        let a = self.alpha;
        Ok(self.c * (r * r / (2.0 * n)) + self.kappa * (r.powf(a + 2.0) / ((a + 2.0) * (a + n))))
    }
    fn gradient(&self, x: Vec3) -> Result<[C64; 3]> {
        let n = self.dim as f64;
        let d = x - self.apex;
        let r = d.norm();
        let s = self.c / n + self.kappa * (r.powf(self.alpha) / (self.alpha + n));
        Ok([s * d.x, s * d.y, s * d.z])
    }
}

/// Planar `w = l1^2 l2^2 A exp(b . (x - apex))` with `l1`, `l2` the signed distances to the two
/// flank lines of a sector: `w` and its gradient vanish on both flanks.
#[derive(Debug, Clone, Copy)]
pub struct FlankBump {
    pub apex: Vec2,
    /// Unit normals of the flank lines.
    pub n1: Vec2,
    pub n2: Vec2,
    pub amplitude: C64,
    pub b: Vec2,
}

impl FlankBump {
    pub fn for_sector(corner: &TruncatedCorner, amplitude: C64, b: Vec2) -> Result<Self> {
        if corner.dimension() != 2 {
            return Err(Error::Geometry("flank bump is planar".into()));
        }
        let axis = corner.axis.xy();
        let e1 = axis.rotate(corner.half_angle);
        let e2 = axis.rotate(-corner.half_angle);
        Ok(Self { apex: corner.apex.xy(), n1: e1.perp(), n2: e2.perp(), amplitude, b })
    }

    fn parts(&self, x: Vec3) -> (f64, f64, C64) {
        let d = x.xy() - self.apex;
        (self.n1.dot(d), self.n2.dot(d), self.amplitude * self.b.dot(d).exp())
    }

    pub fn laplacian(&self, x: Vec3) -> C64 {
        let (l1, l2, s) = self.parts(x);
        let p = l1 * l1 * l2 * l2;
        let lap_p = 2.0 * l2 * l2 + 2.0 * l1 * l1 + 8.0 * l1 * l2 * self.n1.dot(self.n2);
        let grad_p = self.n1 * (2.0 * l1 * l2 * l2) + self.n2 * (2.0 * l1 * l1 * l2);
        s * (lap_p + 2.0 * grad_p.dot(self.b) + p * self.b.dot(self.b))
    }
}

impl Field for FlankBump {
    fn value(&self, x: Vec3) -> Result<C64> {
        let (l1, l2, s) = self.parts(x);
        Ok(s * (l1 * l1 * l2 * l2))
    }
    fn gradient(&self, x: Vec3) -> Result<[C64; 3]> {
        let (l1, l2, s) = self.parts(x);
        let p = l1 * l1 * l2 * l2;
        let grad_p = self.n1 * (2.0 * l1 * l2 * l2) + self.n2 * (2.0 * l1 * l1 * l2);
        let g = grad_p + self.b * p;
        Ok([s * g.x, s * g.y, C64::new(0.0, 0.0)])
    }
}

impl Field for FemField {
    fn value(&self, x: Vec3) -> Result<C64> {
        self.interpolate(x.xy())
            .ok_or_else(|| Error::Geometry(format!("point ({}, {}) outside the mesh", x.x, x.y)))
    }
    fn gradient(&self, x: Vec3) -> Result<[C64; 3]> {
        let m = self.mesh();
        let (t, _) = m
            .locate(x.xy())
            .ok_or_else(|| Error::Geometry(format!("point ({}, {}) outside the mesh", x.x, x.y)))?;
        let (g, _) = m.shape_gradients(t);
        let tri = m.triangles[t];
        let mut out = [C64::new(0.0, 0.0); 3];
        for i in 0..3 {
            out[0] += self.values[tri[i]] * g[i].x;
            out[1] += self.values[tri[i]] * g[i].y;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_laplacian(f: &dyn Field, x: Vec3) -> C64 {
        let s = 1e-4;
        let v = |dx: f64, dy: f64| f.value(x + Vec3::new(dx, dy, 0.0)).unwrap();
        (v(s, 0.0) + v(-s, 0.0) + v(0.0, s) + v(0.0, -s) - v(0.0, 0.0) * 4.0) / (s * s)
    }

    #[test]
    fn analytic_laplacians_match_differences() {
        let rb = RadialBump { apex: Vec3::new(0.1, 0.2, 0.0), dim: 2, c: C64::new(1.5, -0.5), kappa: C64::new(0.7, 0.0), alpha: 0.5 };
        let corner = TruncatedCorner::sector(Vec2::new(0.1, 0.2), Vec2::new(1.0, 1.0), 0.6, 1.0).unwrap();
        let fb = FlankBump::for_sector(&corner, C64::new(2.0, 1.0), Vec2::new(0.3, -0.4)).unwrap();
        for x in [Vec3::new(0.5, 0.4, 0.0), Vec3::new(0.3, 0.7, 0.0)] {
            assert!((fd_laplacian(&rb, x) - rb.laplacian(x)).norm() < 1e-5);
            assert!((fd_laplacian(&fb, x) - fb.laplacian(x)).norm() < 1e-5);
        }
        // Flank bump vanishes to second order on a flank.
        let on_flank = corner.apex + Vec2::new(1.0, 1.0).normalized().rotate(0.6).to_3d() * 0.5;
        assert!(fb.value(on_flank).unwrap().norm() < 1e-15);
        assert!(fb.gradient(on_flank).unwrap().iter().all(|g| g.norm() < 1e-14));
    }
}
