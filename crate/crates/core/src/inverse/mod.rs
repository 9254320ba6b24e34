//! Shape, coefficient and nested-layer recovery from boundary measurements.

mod gap;
mod gauss_newton;
mod levenberg;
mod nelder_mead;
mod shape;
mod simulator;
mod vandermonde;

pub use gap::{cauchy_gap, dirichlet_norm, flux_moments, gap_in, sample_flux, GapNorm, PSI_TOL};
pub use gauss_newton::{fit_coefficients, CoefficientFit, GaussNewtonOptions, Slot};
pub use levenberg::{levenberg_marquardt, LevenbergOptions, LevenbergResult};
pub use nelder_mead::{nelder_mead, NelderMeadOptions, NelderMeadResult};
pub use shape::{
    convex_repair, polish, recover_convex_polygon, recover_nest, search, NestOptions, NestRecovery, ShapeModel,
    ShapeOptions, ShapeRecovery, StageReport, PENALTY,
};
pub use simulator::{synthesize, Measurement, Simulator, DEFAULT_NORM};
pub use vandermonde::{forward_vandermonde, recover_coefficients, CoefficientRecovery};
