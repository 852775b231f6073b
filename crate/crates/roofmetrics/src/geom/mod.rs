//! Fundamental geometry: point clouds, triangle meshes, bounding regions,
//! spatial indexing, mesh sampling, and uniform-density subsampling.

mod cloud;
mod index;
mod mesh;
mod region;
mod sample;

pub use cloud::PointCloud;
pub use index::SpatialIndex;
pub use mesh::TriangleMesh;
pub use region::BoundingRegion;
pub use sample::{sample_mesh, subsample_min_distance};
