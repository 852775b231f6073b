//! Reading and writing point clouds, meshes, transforms, and report
//! artifacts.

mod obj;
mod ply;
mod report;
mod xyz;

use std::io::Read;
use std::path::Path;

use crate::error::{Error, ParseLocation, Result};
use crate::geom::{PointCloud, TriangleMesh};

pub use ply::{read_ply_cloud, read_ply_mesh, write_ply_cloud, write_ply_mesh, PlyEncoding};
pub use report::{
    read_fscore_matrix_csv, read_metric_curve_csv, read_pairs_csv, write_fscore_table_csv,
    write_metric_curve_csv, write_plan_csv, write_svg_curves,
};
pub use xyz::{read_xyz, write_xyz};

/// On-disk cloud encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloudFileFormat {
    PlyAscii,
    PlyBinaryLittleEndian,
    XyzText,
}

/// Reads a point cloud, detecting the format from the file content (PLY
/// magic) or the extension.
pub fn read_cloud(path: &Path) -> Result<PointCloud> {
    if sniff_ply(path)? {
        read_ply_cloud(path)
    } else {
        read_xyz(path)
    }
}

pub fn write_cloud(cloud: &PointCloud, path: &Path, format: CloudFileFormat) -> Result<()> {
    match format {
        CloudFileFormat::PlyAscii => write_ply_cloud(cloud, path, PlyEncoding::Ascii),
        CloudFileFormat::PlyBinaryLittleEndian => {
            write_ply_cloud(cloud, path, PlyEncoding::BinaryLittleEndian)
        }
        CloudFileFormat::XyzText => write_xyz(cloud, path),
    }
}

/// Reads a triangle mesh from PLY or OBJ; quads are fan-triangulated.
pub fn read_mesh(path: &Path) -> Result<TriangleMesh> {
    if sniff_ply(path)? {
        read_ply_mesh(path)
    } else if path.extension().map_or(false, |e| e.eq_ignore_ascii_case("obj")) {
        obj::read_obj(path)
    } else {
        Err(Error::Parse {
            path: path.to_path_buf(),
            location: ParseLocation::Line(1),
            message: "unsupported mesh format (expected PLY or OBJ)".into(),
        })
    }
}

fn sniff_ply(path: &Path) -> Result<bool> {
    let mut magic = [0u8; 4];
    let mut file = std::fs::File::open(path)?;
    let n = file.read(&mut magic)?;
    Ok(n >= 4 && &magic == b"ply\n" || n >= 4 && &magic[..3] == b"ply")
}
