//! Topological summaries of trees embedded in 3-space.
//!
//! The pipeline: parse an embedded tree, filter it (by a height function for
//! dimension 0, or by a Vietoris-Rips complex on a subsample for dimension 1),
//! extract persistence diagrams, compare or vectorize them, and run cohort
//! statistics (PCA, correlation, permutation tests) on the resulting features.
//!
//! Everything numeric is generic over a scalar type implementing [`Real`];
//! the crate root re-exports `f64` aliases for the common case.

pub mod diagmetrics;
pub mod diagram;
pub mod features;
pub mod geom;
pub mod num;
pub mod ph0;
pub mod ph1;
pub mod stats;
pub mod synth;
pub mod treeio;

mod assignment;
mod eigen;

pub use num::Real;

/// Point in 3-space with `f64` coordinates.
pub type Point3f = geom::Point3<f64>;
/// Embedded tree with `f64` coordinates.
pub type EmbeddedTreef = treeio::EmbeddedTree<f64>;
/// Point cloud with `f64` coordinates.
pub type PointCloudf = treeio::PointCloud<f64>;
/// Persistence diagram with `f64` birth/death values.
pub type PersistenceDiagramf = diagram::PersistenceDiagram<f64>;
/// Feature vector with `f64` entries.
pub type FeatureVectorf = features::FeatureVector<f64>;
