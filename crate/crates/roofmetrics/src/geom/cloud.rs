use nalgebra::Point3;

use crate::error::{Error, Result};
use crate::geom::BoundingRegion;

/// A set of 3D points in meters, with optional per-point RGB color and an
/// optional per-point scalar field (meters, used for distance results).
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Point3<f64>>,
    colors: Option<Vec<[u8; 3]>>,
    scalars: Option<Vec<f64>>,
}

impl PointCloud {
    /// Builds a cloud from positions. All coordinates must be finite.
    pub fn new(points: Vec<Point3<f64>>) -> Result<Self> {
        if points.iter().any(|p| !p.coords.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidParam(
                "point cloud contains non-finite coordinates".into(),
            ));
        }
        Ok(Self {
            points,
            colors: None,
            scalars: None,
        })
    }

    pub fn with_colors(mut self, colors: Vec<[u8; 3]>) -> Result<Self> {
        if colors.len() != self.points.len() {
            return Err(Error::InvalidParam(format!(
                "color count {} does not match point count {}",
                colors.len(),
                self.points.len()
            )));
        }
        self.colors = Some(colors);
        Ok(self)
    }

    /// Attaches a scalar field (one value per point).
    pub fn with_scalars(mut self, scalars: Vec<f64>) -> Result<Self> {
        if scalars.len() != self.points.len() {
            return Err(Error::InvalidParam(format!(
                "scalar count {} does not match point count {}",
                scalars.len(),
                self.points.len()
            )));
        }
        self.scalars = Some(scalars);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3<f64>] {
        &self.points
    }

    pub fn colors(&self) -> Option<&[[u8; 3]]> {
        self.colors.as_deref()
    }

    pub fn scalars(&self) -> Option<&[f64]> {
        self.scalars.as_deref()
    }

    /// New cloud keeping only the points at `indices`, carrying colors and
    /// scalars along.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            colors: self
                .colors
                .as_ref()
                .map(|c| indices.iter().map(|&i| c[i]).collect()),
            scalars: self
                .scalars
                .as_ref()
                .map(|s| indices.iter().map(|&i| s[i]).collect()),
        }
    }

    /// Points inside `region`, boundary-inclusive.
    pub fn crop(&self, region: &BoundingRegion) -> Self {
        let keep: Vec<usize> = (0..self.points.len())
            .filter(|&i| region.contains(&self.points[i]))
            .collect();
        self.select(&keep)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        let err = PointCloud::new(vec![Point3::new(0.0, f64::NAN, 0.0)]);
        assert!(err.is_err());
    }

    #[test]
    fn scalar_length_mismatch() {
        let cloud = PointCloud::new(vec![Point3::origin()]).unwrap();
        assert!(cloud.with_scalars(vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn crop_identity_when_all_inside() {
        let cloud = PointCloud::new(vec![
            Point3::new(0.2, 0.2, 0.2),
            Point3::new(0.8, 0.8, 0.8),
        ])
        .unwrap();
        let region = BoundingRegion::aabb(Point3::origin(), Point3::new(1.0, 1.0, 1.0)).unwrap();
        assert_eq!(cloud.crop(&region), cloud);
    }

    #[test]
    fn crop_drops_outside_points() {
        let cloud = PointCloud::new(vec![
            Point3::new(0.5, 0.5, 0.5),
            Point3::new(2.0, 2.0, 2.0),
        ])
        .unwrap();
        let region = BoundingRegion::aabb(Point3::origin(), Point3::new(1.0, 1.0, 1.0)).unwrap();
        let cropped = cloud.crop(&region);
        assert_eq!(cropped.len(), 1);
        assert_eq!(cropped.points()[0], Point3::new(0.5, 0.5, 0.5));
    }
}
