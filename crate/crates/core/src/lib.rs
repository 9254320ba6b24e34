//! Forward and inverse machinery for semilinear elliptic problems with polygonal
//! anomalous inclusions.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] – convex polygons, truncated corners, nests and corona shapes.
//! * [`mesh`] – conforming triangulations with exactly resolved interfaces.
//! * [`forward`] – P1 finite elements with a Newton solver and Cauchy-data extraction.
//! * [`probes`] – complex geometrical optics (CGO) probes and their corner integrals.
//! * [`indicator`] – Green-identity apex extraction on truncated corners.
//! * [`inverse`] – shape, coefficient and nested-layer recovery from boundary data.
//! * [`admissibility`] – vertex nondegeneracy checks and small-data expansions.
//! * [`experiments`] – named experiment strategies driven by JSON configs.
//!
//! [`quadrature`], [`linalg`] and [`fit`] are shared numerical plumbing.

pub mod admissibility;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod forward;
pub mod geometry;
pub mod indicator;
pub mod inverse;
pub mod linalg;
pub mod mesh;
pub mod probes;
pub mod quadrature;
mod serde_cx;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
