use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;
use crate::C64;

/// Dirichlet data families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "type")]
pub enum BoundaryData {
    Zero,
    /// `amplitude * exp(i k x . direction)`.
    #[serde(rename_all = "camelCase")]
    PlaneWave {
        #[serde(with = "crate::serde_cx")]
        amplitude: C64,
        wavenumber: f64,
        direction: Vec2,
    },
    /// `a x + b y + c`.
    Affine {
        #[serde(with = "crate::serde_cx")]
        a: C64,
        #[serde(with = "crate::serde_cx")]
        b: C64,
        #[serde(with = "crate::serde_cx")]
        c: C64,
    },
    /// Sum of families.
    Sum { parts: Vec<BoundaryData> },
}

impl BoundaryData {
    pub fn plane_wave(amplitude: f64, wavenumber: f64, angle: f64) -> Self {
        Self::PlaneWave {
            amplitude: C64::new(amplitude, 0.0),
            wavenumber,
            direction: Vec2::from_angle(angle),
        }
    }

    pub fn eval(&self, p: Vec2) -> C64 {
        match self {
            Self::Zero => C64::new(0.0, 0.0),
            Self::PlaneWave { amplitude, wavenumber, direction } => {
                amplitude * C64::new(0.0, wavenumber * p.dot(direction.normalized())).exp()
            }
            Self::Affine { a, b, c } => a * p.x + b * p.y + c,
            Self::Sum { parts } => parts.iter().map(|q| q.eval(p)).sum(),
        }
    }

    /// The same family scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            Self::Zero => Self::Zero,
            Self::PlaneWave { amplitude, wavenumber, direction } => Self::PlaneWave {
                amplitude: amplitude * factor,
                wavenumber: *wavenumber,
                direction: *direction,
            },
            Self::Affine { a, b, c } => Self::Affine { a: a * factor, b: b * factor, c: c * factor },
            Self::Sum { parts } => Self::Sum { parts: parts.iter().map(|q| q.scaled(factor)).collect() },
        }
    }
}
