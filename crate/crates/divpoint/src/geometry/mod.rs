//! Planar primitives: points, isometries, simple polygons, and the
//! grid-based vertex unification used when tiles of a patch share corners.
//!
//! Every value is immutable after construction and every operation is pure.

mod isometry;
mod merge;
mod point;
mod polygon;

pub use isometry::{Isometry, Similarity, ORTHO_TOL};
pub use merge::{VertexKey, VertexMerger};
pub use point::Point;
pub use polygon::{
    apply_isometry, apply_similarity, min_edge_length, point_in_polygon, polygon_area,
    signed_area, Location, Polygon,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("coordinates must be finite")]
    NonFinite,
    #[error("degenerate polygon (vertices are collinear or area is zero)")]
    Degenerate,
    #[error("polygon edges self-intersect")]
    SelfIntersecting,
    #[error("linear part is not orthogonal (QᵀQ ≠ I or |det| ≠ 1)")]
    NotOrthogonal,
    #[error("empty input")]
    EmptyInput,
}
