//! Polygons, truncated corners, nests, corona shapes and probe directions.

mod corner;
mod corona;
mod nest;
mod polygon;
mod vector;

pub use corner::{
    choose_probe_direction, max_corner_radius, sample_rays, vertex_corner, CornerKind, CornerSpec,
    ProbeDirection, TruncatedCorner,
};
pub use corona::{validate_corona, CoronaCore, CoronaReport, CoronaShape, Spike};
pub use nest::{boundary_distance, validate_nest, NestReport, NestedPartition};
pub use polygon::ConvexPolygon;
pub use vector::{point_segment_distance, segment_segment_distance, segments_intersect, Vec2, Vec3};
