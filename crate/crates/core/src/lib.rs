//! Deterministic and randomized dyadic cube systems on finite doubling metric
//! point clouds, with exact boundary probabilities, spline partitions of
//! unity and Haar bases.

pub mod boundary;
pub mod cli;
pub mod cubes;
pub mod error;
pub mod experiments;
pub mod haar;
pub mod hierarchy;
pub mod metric;
pub mod random;
pub mod report;
pub mod scale;
pub mod sets;
pub mod splines;
pub mod verify;

pub use error::{Error, Result};
pub use metric::{MetricPointCloud, PointId};
pub use scale::Delta;
pub use sets::PointSet;

/// Exact rational used for probabilities and exact radii.
pub type Rational = num_rational::Ratio<i128>;
