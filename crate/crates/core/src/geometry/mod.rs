//! Metric charts, Christoffel symbols, covariant derivatives and geodesics.

mod chart;
mod field;
mod geodesic;
mod grid;
mod matrix;

pub use chart::{Interval, MetricChart, PointGeometry};
pub use field::{
    covariant_derivative_bilinear, covariant_derivative_covector, lower_index, raise_index,
    BilinearField, BilinearJet, CovectorField, CovectorJet, ScalarJet,
};
pub use geodesic::{
    energies, geodesic_map_check, integrate_geodesic, Trajectory, TrajectoryPoint,
};
pub use grid::{random_points, GridConfig, SampleGrid, DEFAULT_SEED};
pub use matrix::ExprMatrix;
