//! Convex domains, Voronoi partitions, and grid quadrature over cells.

mod domain;
mod field;
mod point;
pub mod polygon;
mod voronoi;

use thiserror::Error;

pub use domain::ConvexDomain;
pub use field::{integrate_abs_difference, ScalarField2D};
pub use point::Point2;
pub use voronoi::{
    argmax_in_cell, cell_mass_centroid, cell_moments_all, cell_moments_each, compute_partition, coverage_cost, nearest_generator,
    CellMoments, VoronoiCell, VoronoiPartition, MASS_FLOOR,
};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("no generators given")]
    NoGenerators,
    #[error("generator {index} lies outside the domain")]
    OutsideDomain { index: usize },
    #[error("generators {first} and {second} coincide")]
    CoincidentGenerators { first: usize, second: usize },
    #[error("cell {index} owns no grid points")]
    EmptyCell { index: usize },
    #[error("fields are defined on different grids")]
    GridMismatch,
}
