use nalgebra::{DMatrix, DVector, Matrix3, Point3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{PointCloud, SpatialIndex};

/// Local surface model configuration for cloud-to-cloud distances.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LocalModelOptions {
    /// Neighborhood radius around the nearest reference point (meters).
    pub neighbor_radius: f64,
    pub model: ModelKind,
    /// Below this neighbor count the quadric fit falls back to the plain
    /// nearest-point distance.
    pub min_neighbors: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// z' = a + bx' + cy' + dx'^2 + ex'y' + fy'^2 in a PCA-aligned frame.
    QuadraticHeight,
    /// Plain nearest-point distance.
    NearestPoint,
}

impl Default for LocalModelOptions {
    fn default() -> Self {
        Self {
            neighbor_radius: 0.10,
            model: ModelKind::QuadraticHeight,
            min_neighbors: 6,
        }
    }
}

impl LocalModelOptions {
    fn validate(&self) -> Result<()> {
        if !(self.neighbor_radius > 0.0) {
            return Err(Error::InvalidParam("neighbor radius must be positive".into()));
        }
        if self.model == ModelKind::QuadraticHeight && self.min_neighbors < 6 {
            return Err(Error::InvalidParam(
                "quadric fit needs at least 6 neighbors".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelUsed {
    Quadric,
    NearestPoint,
}

/// One-directional distances from each compared point to the reference
/// surface.
#[derive(Debug, Clone)]
pub struct C2CDistances {
    pub distances: Vec<f64>,
    pub model_used: Vec<ModelUsed>,
}

impl C2CDistances {
    /// Fraction of points that fell back to the nearest-point distance.
    pub fn fallback_fraction(&self) -> f64 {
        if self.model_used.is_empty() {
            return 0.0;
        }
        self.model_used
            .iter()
            .filter(|m| **m == ModelUsed::NearestPoint)
            .count() as f64
            / self.model_used.len() as f64
    }
}

/// Both directions of a cloud-to-cloud comparison: reconstruction→GT
/// (drives precision) and GT→reconstruction (drives recall).
#[derive(Debug, Clone)]
pub struct C2CResult {
    pub recon_to_gt: C2CDistances,
    pub gt_to_recon: C2CDistances,
}

/// Distance from each compared point to a local surface model of the
/// reference cloud.
///
/// For each compared point, neighbors are gathered within
/// `opts.neighbor_radius` of its nearest reference point (not the compared
/// point itself, so isolated points still find a patch). With enough
/// neighbors a quadratic height function is fit in a PCA-aligned frame and
/// the residual along the local normal axis is returned; otherwise the
/// plain nearest-point distance is used and flagged.
pub fn c2c_distances(
    compared: &PointCloud,
    reference: &SpatialIndex,
    opts: &LocalModelOptions,
) -> Result<C2CDistances> {
    opts.validate()?;
    if compared.is_empty() {
        return Err(Error::EmptyCloud("compared cloud is empty"));
    }
    if reference.is_empty() {
        return Err(Error::EmptyCloud("reference cloud is empty"));
    }

    let results: Vec<(f64, ModelUsed)> = compared
        .points()
        .par_iter()
        .map(|q| {
            let (nearest_idx, nearest_dist) = reference.nearest(q);
            if opts.model == ModelKind::NearestPoint {
                return (nearest_dist, ModelUsed::NearestPoint);
            }
            let anchor = reference.points()[nearest_idx];
            let neighbors = reference.within_radius(&anchor, opts.neighbor_radius);
            if neighbors.len() < opts.min_neighbors {
                return (nearest_dist, ModelUsed::NearestPoint);
            }
            match quadric_residual(reference.points(), &neighbors, q) {
                Some(d) => (d, ModelUsed::Quadric),
                None => (nearest_dist, ModelUsed::NearestPoint),
            }
        })
        .collect();

    let (distances, model_used) = results.into_iter().unzip();
    Ok(C2CDistances {
        distances,
        model_used,
    })
}

/// Runs both comparison directions.
pub fn compare_clouds(
    reconstruction: &PointCloud,
    ground_truth: &PointCloud,
    opts: &LocalModelOptions,
) -> Result<C2CResult> {
    let gt_index = SpatialIndex::build(ground_truth)?;
    let recon_index = SpatialIndex::build(reconstruction)?;
    Ok(C2CResult {
        recon_to_gt: c2c_distances(reconstruction, &gt_index, opts)?,
        gt_to_recon: c2c_distances(ground_truth, &recon_index, opts)?,
    })
}

/// Distance from `query` to the quadratic height function fit over the
/// given reference neighborhood. Exposed so an exhaustive-search pipeline
/// can share the exact model arithmetic.
///
/// Returns `None` when the fit is numerically unusable.
pub fn local_model_distance(
    reference_points: &[Point3<f64>],
    neighbor_indices: &[usize],
    query: &Point3<f64>,
) -> Option<f64> {
    quadric_residual(reference_points, neighbor_indices, query)
}

fn quadric_residual(
    points: &[Point3<f64>],
    neighbors: &[usize],
    query: &Point3<f64>,
) -> Option<f64> {
    let n = neighbors.len();
    if n < 6 {
        return None;
    }

    // PCA frame: local z' is the least-variance principal direction.
    let centroid: Vector3<f64> =
        neighbors.iter().map(|&i| points[i].coords).sum::<Vector3<f64>>() / n as f64;
    let mut cov = Matrix3::zeros();
    for &i in neighbors {
        let d = points[i].coords - centroid;
        cov += d * d.transpose();
    }
    cov /= n as f64;

    let eig = cov.symmetric_eigen();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let z_axis = eig.eigenvectors.column(order[0]).into_owned();
    let x_axis = eig.eigenvectors.column(order[2]).into_owned();
    let y_axis = z_axis.cross(&x_axis);

    let to_local = |p: &Point3<f64>| {
        let d = p.coords - centroid;
        Vector3::new(x_axis.dot(&d), y_axis.dot(&d), z_axis.dot(&d))
    };

    // Least-squares fit of z' = a + b x' + c y' + d x'^2 + e x'y' + f y'^2.
    let mut design = DMatrix::zeros(n, 6);
    let mut heights = DVector::zeros(n);
    for (row, &i) in neighbors.iter().enumerate() {
        let l = to_local(&points[i]);
        design[(row, 0)] = 1.0;
        design[(row, 1)] = l.x;
        design[(row, 2)] = l.y;
        design[(row, 3)] = l.x * l.x;
        design[(row, 4)] = l.x * l.y;
        design[(row, 5)] = l.y * l.y;
        heights[row] = l.z;
    }
    let svd = design.svd(true, true);
    let coeffs = svd.solve(&heights, 1e-12).ok()?;

    let q = to_local(query);
    let predicted = coeffs[0]
        + coeffs[1] * q.x
        + coeffs[2] * q.y
        + coeffs[3] * q.x * q.x
        + coeffs[4] * q.x * q.y
        + coeffs[5] * q.y * q.y;
    let residual = (q.z - predicted).abs();
    residual.is_finite().then_some(residual)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane_grid(pitch: f64, half_extent: f64) -> PointCloud {
        let mut pts = Vec::new();
        let steps = (half_extent / pitch).round() as i64;
        for i in -steps..=steps {
            for j in -steps..=steps {
                pts.push(Point3::new(i as f64 * pitch, j as f64 * pitch, 0.0));
            }
        }
        PointCloud::new(pts).unwrap()
    }

    #[test]
    fn self_comparison_is_zero() {
        let cloud = plane_grid(0.02, 0.3);
        let index = SpatialIndex::build(&cloud).unwrap();
        let result = c2c_distances(&cloud, &index, &LocalModelOptions::default()).unwrap();
        assert!(result.distances.iter().all(|&d| d < 1e-9));
    }

    #[test]
    fn plane_offset_is_exact() {
        let reference = plane_grid(0.01, 0.5);
        let index = SpatialIndex::build(&reference).unwrap();
        let compared =
            PointCloud::new(vec![Point3::new(0.123, -0.217, 0.02)]).unwrap();
        let result = c2c_distances(&compared, &index, &LocalModelOptions::default()).unwrap();
        assert_eq!(result.model_used[0], ModelUsed::Quadric);
        assert!(
            (result.distances[0] - 0.02).abs() < 1e-6,
            "distance {}",
            result.distances[0]
        );
    }

    #[test]
    fn paraboloid_on_surface_beats_nearest_point() {
        // Dense samples of z = x^2 + y^2.
        let mut pts = Vec::new();
        let pitch = 0.004;
        let steps = (0.35 / pitch) as i64;
        for i in -steps..=steps {
            for j in -steps..=steps {
                let (x, y) = (i as f64 * pitch, j as f64 * pitch);
                pts.push(Point3::new(x, y, x * x + y * y));
            }
        }
        let reference = PointCloud::new(pts).unwrap();
        let index = SpatialIndex::build(&reference).unwrap();

        // On-surface points offset from the grid nodes.
        let queries: Vec<Point3<f64>> = [(0.051, 0.073), (-0.142, 0.037), (0.101, -0.199)]
            .iter()
            .map(|&(x, y): &(f64, f64)| Point3::new(x, y, x * x + y * y))
            .collect();
        let compared = PointCloud::new(queries.clone()).unwrap();
        let result = c2c_distances(&compared, &index, &LocalModelOptions::default()).unwrap();

        for (q, &d) in queries.iter().zip(&result.distances) {
            let (_, nearest) = index.nearest(q);
            assert!(d < 1e-4, "quadric distance {d}");
            assert!(d < nearest, "quadric {d} should beat nearest-point {nearest}");
        }
    }

    #[test]
    fn sparse_reference_falls_back() {
        let reference = PointCloud::new(vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ])
        .unwrap();
        let index = SpatialIndex::build(&reference).unwrap();
        let compared = PointCloud::new(vec![Point3::new(0.0, 0.0, 0.5)]).unwrap();
        let result = c2c_distances(&compared, &index, &LocalModelOptions::default()).unwrap();
        assert_eq!(result.model_used[0], ModelUsed::NearestPoint);
        assert!((result.distances[0] - 0.5).abs() < 1e-12);
        assert_eq!(result.fallback_fraction(), 1.0);
    }

    #[test]
    fn coplanar_neighbors_still_fit() {
        // All neighbors exactly coplanar: the quadric degenerates to the
        // plane and must still produce the analytic offset.
        let reference = plane_grid(0.02, 0.2);
        let index = SpatialIndex::build(&reference).unwrap();
        let compared = PointCloud::new(vec![Point3::new(0.01, 0.01, 0.037)]).unwrap();
        let result = c2c_distances(&compared, &index, &LocalModelOptions::default()).unwrap();
        assert_eq!(result.model_used[0], ModelUsed::Quadric);
        assert!((result.distances[0] - 0.037).abs() < 1e-6);
    }

    #[test]
    fn empty_reference_is_an_error() {
        let cloud = plane_grid(0.1, 0.2);
        let empty = PointCloud::new(vec![]).unwrap();
        assert!(SpatialIndex::build(&empty).is_err());
        // Empty compared side errors too.
        let index = SpatialIndex::build(&cloud).unwrap();
        assert!(c2c_distances(&empty, &index, &LocalModelOptions::default()).is_err());
    }
}
