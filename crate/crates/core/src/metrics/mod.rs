//! Surface sampling and the shape-comparison metrics.

mod cloud;
mod distribution;
mod kdtree;
mod pairwise;
mod protocol;

use thiserror::Error;

pub use cloud::{
    read_xyz, sample_surface, stream_rng, unit_normalize, unit_normalize_mesh, write_xyz, PointCloud, UnitTransform,
};
pub use distribution::{
    chamfer_matrix, coverage, coverage_from_matrix, invalidity_ratio, jsd, jsd_from_distributions, mmd,
    mmd_from_matrix, voxel_distribution,
};
pub use kdtree::{dist_sq, nearest_brute, KdTree};
pub use pairwise::{
    chamfer, chamfer_points, classify_edge_points, edge_chamfer, nearest_neighbors, normal_consistency, EdgeParams,
};
pub use protocol::{evaluate_sets, median, EvalProtocol, MetricsReport, PairRow, RepeatRow, ShapeEntry, TABLE_COLUMNS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("shape set is empty")]
    EmptySet,
    #[error("reference shapes without a generated counterpart: {0}")]
    Unpaired(String),
    #[error("{0}")]
    Invalid(String),
    #[error("io: {0}")]
    Io(String),
}
