//! Clustering primitives: density-based initial clustering with an outlier
//! label, Ward agglomeration over a distance matrix, and MMR selection.

mod density;
mod mmr;
mod ward;

pub use density::{density_cluster, density_cluster_with, ClusterLabeling, DensityError};
pub use mmr::mmr_select;
pub use ward::{ward_cluster, ward_linkage, Linkage, MergeStep, WardError};
