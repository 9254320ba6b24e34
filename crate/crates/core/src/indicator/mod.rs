//! Green-identity apex extraction on truncated corners.

mod extract;
mod fields;
mod green;

pub use extract::{extract_apex_value, extract_two_content_gap, ExtractOptions, ExtractionResult, FlankPolicy};
pub use fields::{Field, FieldDiff, FlankBump, FnField, PlaneWave, RadialBump, ShiftedField};
pub use green::{boundary_integral, flank_mismatch, green_identity_residual, volume_integral, BoundaryPart, GreenResidual};
