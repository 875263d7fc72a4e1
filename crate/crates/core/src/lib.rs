//! Decentralized multi-robot coverage of an initially unknown density field.
//!
//! Robots partition a convex domain into Voronoi cells, learn the density from
//! noisy samples with Gaussian-process regression, share samples with their
//! Voronoi neighbors, and move with a Lloyd-type explore/cover controller.
//!
//! All numeric code is generic over [`Real`]; the aliases below fix `f64`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agent;
pub mod comm;
pub mod geometry;
pub mod gp;
pub mod scalar;
pub mod sim;

pub use scalar::Real;

pub type Point = geometry::Point2<f64>;
pub type Domain = geometry::ConvexDomain<f64>;
pub type Field = geometry::ScalarField2D<f64>;
pub type Partition = geometry::VoronoiPartition<f64>;
pub type Model = gp::GpModel<f64>;
pub type Scenario = sim::ScenarioConfig<f64>;
