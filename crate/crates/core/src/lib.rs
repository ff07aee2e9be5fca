//! Unified transform solver for the modified Helmholtz equation
//! `∂_z ∂_z̄ q = β² q` in convex polygons.

// NaN-rejecting guards are written as negated comparisons.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary_data;
pub mod corner_analysis;
pub mod error;
pub mod evaluator;
pub mod geometry;
pub mod global_relation;
pub mod halfstrip;
pub mod linalg;
pub mod quadrature;
pub mod regularity;
pub mod scalar;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::{Real, ScaledComplex};

/// Double-precision instantiations.
pub type Polygon64 = geometry::Polygon<f64>;
pub type Side64 = geometry::Side<f64>;
pub type BoundaryDatum64 = boundary_data::BoundaryDatum<f64>;
pub type SideData64 = spectral::SideData<f64>;
pub type BoundaryCondition64 = global_relation::BoundaryCondition<f64>;
pub type BoundaryConditionSpec64 = global_relation::BoundaryConditionSpec<f64>;
pub type CollocationConfig64 = global_relation::CollocationConfig<f64>;
pub type SolvedBoundary64 = global_relation::SolvedBoundary<f64>;
pub type ExponentialSolution64 = spectral::ExponentialSolution<f64>;
pub type HalfStripParams64 = halfstrip::HalfStripParams<f64>;
pub type GridField64 = evaluator::GridField<f64>;
