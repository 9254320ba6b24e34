//! Complex dense and sparse direct solvers.

mod dense;
mod sparse;

pub use dense::{cond1, solve_dense, DenseLu, DenseMatrix};
pub use sparse::{rcm_ordering, BandLu, CsrMatrix, SparsePattern};
