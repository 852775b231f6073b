use nalgebra::Point3;

use crate::error::{Error, Result};

/// An indexed triangle mesh in meters, optionally colored per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Point3<f64>>,
    triangles: Vec<[usize; 3]>,
    colors: Option<Vec<[u8; 3]>>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Point3<f64>>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if vertices
            .iter()
            .any(|v| !v.coords.iter().all(|c| c.is_finite()))
        {
            return Err(Error::InvalidParam(
                "mesh contains non-finite vertex coordinates".into(),
            ));
        }
        for (i, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidParam(format!(
                    "triangle {i} references a vertex out of range (vertex count {})",
                    vertices.len()
                )));
            }
        }
        Ok(Self {
            vertices,
            triangles,
            colors: None,
        })
    }

    pub fn with_colors(mut self, colors: Vec<[u8; 3]>) -> Result<Self> {
        if colors.len() != self.vertices.len() {
            return Err(Error::InvalidParam(format!(
                "color count {} does not match vertex count {}",
                colors.len(),
                self.vertices.len()
            )));
        }
        self.colors = Some(colors);
        Ok(self)
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn colors(&self) -> Option<&[[u8; 3]]> {
        self.colors.as_deref()
    }

    pub fn triangle_area(&self, tri: usize) -> f64 {
        let [a, b, c] = self.triangles[tri];
        let ab = self.vertices[b] - self.vertices[a];
        let ac = self.vertices[c] - self.vertices[a];
        ab.cross(&ac).norm() * 0.5
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Appends another mesh, reindexing its triangles.
    pub fn append(&mut self, other: &TriangleMesh) {
        let offset = self.vertices.len();
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles.extend(
            other
                .triangles
                .iter()
                .map(|t| [t[0] + offset, t[1] + offset, t[2] + offset]),
        );
        // Colors are all-or-nothing; drop them if either side lacks them.
        match (&mut self.colors, &other.colors) {
            (Some(mine), Some(theirs)) => mine.extend_from_slice(theirs),
            _ => self.colors = None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn out_of_range_index_rejected() {
        let verts = vec![Point3::origin(), Point3::new(1.0, 0.0, 0.0)];
        assert!(TriangleMesh::new(verts, vec![[0, 1, 2]]).is_err());
    }

    #[test]
    fn unit_square_area() {
        let verts = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(1.0, 1.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        let mesh = TriangleMesh::new(verts, vec![[0, 1, 2], [0, 2, 3]]).unwrap();
        assert!((mesh.surface_area() - 1.0).abs() < 1e-12);
    }
}
