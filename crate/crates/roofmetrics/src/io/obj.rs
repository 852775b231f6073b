use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use nalgebra::Point3;

use crate::error::{Error, ParseLocation, Result};
use crate::geom::TriangleMesh;

/// Minimal OBJ reader: `v` and `f` records, 1-based indices, faces with
/// more than three vertices fan-triangulated.
pub fn read_obj(path: &Path) -> Result<TriangleMesh> {
    let reader = BufReader::new(File::open(path)?);
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut fanned = 0usize;

    for (line_no, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = line_no + 1;
        let err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            location: ParseLocation::Line(line_no),
            message: msg,
        };
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let mut coord = || -> Result<f64> {
                    tokens
                        .next()
                        .ok_or_else(|| err("vertex with fewer than 3 coordinates".into()))?
                        .parse::<f64>()
                        .map_err(|_| err("invalid vertex coordinate".into()))
                };
                vertices.push(Point3::new(coord()?, coord()?, coord()?));
            }
            Some("f") => {
                let indices: Vec<usize> = tokens
                    .map(|t| {
                        // "idx", "idx/uv", or "idx/uv/normal".
                        let first = t.split('/').next().unwrap_or("");
                        let idx = first
                            .parse::<i64>()
                            .map_err(|_| err(format!("invalid face index '{t}'")))?;
                        if idx < 1 {
                            return Err(err(format!(
                                "unsupported non-positive face index '{t}'"
                            )));
                        }
                        Ok(idx as usize - 1)
                    })
                    .collect::<Result<_>>()?;
                if indices.len() < 3 {
                    return Err(err(format!("face with {} vertices", indices.len())));
                }
                if indices.len() > 3 {
                    fanned += 1;
                }
                for k in 1..indices.len() - 1 {
                    triangles.push([indices[0], indices[k], indices[k + 1]]);
                }
            }
            _ => {}
        }
    }

    if fanned > 0 {
        log::warn!("fan-triangulated {fanned} non-triangle faces in {}", path.display());
    }
    TriangleMesh::new(vertices, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn reads_triangles_and_quads() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("mesh.obj");
        std::fs::write(
            &path,
            "# comment\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1/1 2/2 3/3 4/4\n",
        )
        .unwrap();
        let mesh = read_obj(&path).unwrap();
        assert_eq!(mesh.triangles(), &[[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn out_of_range_face_index_is_an_error() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.obj");
        std::fs::write(&path, "v 0 0 0\nf 1 2 3\n").unwrap();
        assert!(read_obj(&path).is_err());
    }
}
