//! Metric analysis of set-valued functions of bounded variation.
//!
//! The crate models maps `F : [a,b] -> K(R^d)` (compact nonempty images,
//! finite point clouds or unions of closed balls) and provides the metric
//! machinery built on nearest-point projections: metric pairs and chains,
//! metric linear combinations, chain functions, metric selections, one-sided
//! limits, and the analysis of the midpoint limit set at jump points against
//! the metric average of the one-sided limits.
//!
//! All numeric code is generic over a floating scalar (see [`scalar::Scalar`]);
//! concrete `f64` aliases live at the crate root.

pub mod config;
pub mod error;
pub mod geometry;
pub mod pairs;
pub mod scalar;
pub mod selections;
pub mod svf;

pub use config::{Budget, Config, ToleranceConfig};
pub use error::{Error, Result};
pub use geometry::{hausdorff, Ball, CompactSet, NormKind, Point, PointSet};
pub use pairs::{MetricChain, MetricCombinationSpec, MetricPair, PairWitness};
pub use scalar::Scalar;

pub type Point64 = geometry::Point<f64>;
pub type PointSet64 = geometry::PointSet<f64>;
pub type CompactSet64 = geometry::CompactSet<f64>;
pub type Config64 = config::Config<f64>;
pub type ToleranceConfig64 = config::ToleranceConfig<f64>;
