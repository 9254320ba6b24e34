//! Vertex nondegeneracy checks (Assumptions A-D) and small-data expansions.
//!
//! Every assumption reduces to two kinds of quantity at the vertices of a layer: the jump
//! between the outer and inner content evaluated at the field value, and, for measurement
//! families, the product of pairwise field differences. Thresholds scale with a Richardson
//! estimate of each quantity's discretization error.

mod check;
mod expansion;

pub use check::{
    check_assumption, AdmissibilityOptions, AdmissibilityReport, Assumption, ExteriorCheck, Quantity, SatisfiedBy,
    TestedQuantity,
};
pub use expansion::{
    assumption_for, leading_order_ratios, nest_small_data_expansion, small_data_expansion, ExpansionConfig,
    ExpansionRow, ExpansionTable, LeadingOrderRow, LeadingOrderTable, Scaled,
};
