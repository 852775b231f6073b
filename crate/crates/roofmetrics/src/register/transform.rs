use nalgebra::{Matrix3, Point3, Vector3, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::PointCloud;

/// A proper rigid motion p -> R p + t.
///
/// Serialized as a row-major 3x3 rotation plus a 3-vector translation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RigidTransformWire", into = "RigidTransformWire")]
pub struct RigidTransform {
    /// Orthonormal rotation, det = +1.
    pub rotation: Matrix3<f64>,
    /// Translation in meters.
    pub translation: Vector3<f64>,
}

#[derive(Serialize, Deserialize)]
struct RigidTransformWire {
    rotation: [[f64; 3]; 3],
    translation: [f64; 3],
}

impl From<RigidTransform> for RigidTransformWire {
    fn from(t: RigidTransform) -> Self {
        let r = &t.rotation;
        Self {
            rotation: [
                [r[(0, 0)], r[(0, 1)], r[(0, 2)]],
                [r[(1, 0)], r[(1, 1)], r[(1, 2)]],
                [r[(2, 0)], r[(2, 1)], r[(2, 2)]],
            ],
            translation: t.translation.into(),
        }
    }
}

impl TryFrom<RigidTransformWire> for RigidTransform {
    type Error = String;

    fn try_from(w: RigidTransformWire) -> std::result::Result<Self, String> {
        let t = RigidTransform {
            rotation: Matrix3::from_fn(|i, j| w.rotation[i][j]),
            translation: Vector3::from(w.translation),
        };
        t.validate().map_err(|e| e.to_string())?;
        Ok(t)
    }
}

impl RigidTransform {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        let t = Self {
            rotation,
            translation,
        };
        t.validate()?;
        Ok(t)
    }

    /// Rotation of `angle_deg` about a unit `axis`, then translation.
    pub fn from_axis_angle(axis: Vector3<f64>, angle_deg: f64, translation: Vector3<f64>) -> Self {
        let rot = nalgebra::Rotation3::from_axis_angle(
            &nalgebra::Unit::new_normalize(axis),
            angle_deg.to_radians(),
        );
        Self {
            rotation: *rot.matrix(),
            translation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let rtr = self.rotation.transpose() * self.rotation;
        if (rtr - Matrix3::identity()).norm() > 1e-9 {
            return Err(Error::InvalidParam(
                "rotation matrix is not orthonormal".into(),
            ));
        }
        if (self.rotation.determinant() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParam(
                "rotation matrix determinant is not +1".into(),
            ));
        }
        Ok(())
    }

    pub fn apply(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    /// `self` after `other`: (self ∘ other)(p) = self(other(p)).
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
        .renormalized()
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// Projects the rotation back onto SO(3); keeps long composition chains
    /// orthonormal.
    pub fn renormalized(&self) -> Self {
        let svd = SVD::new(self.rotation, true, true);
        let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
        let mut r = u * v_t;
        if r.determinant() < 0.0 {
            let flip = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
            r = u * flip * v_t;
        }
        Self {
            rotation: r,
            translation: self.translation,
        }
    }
}

/// Maps every point of `cloud` through `t`, preserving colors and scalars.
pub fn apply_transform(cloud: &PointCloud, t: &RigidTransform) -> PointCloud {
    let points = cloud.points().iter().map(|p| t.apply(p)).collect();
    let mut out = PointCloud::new(points).expect("rigid motion preserves finiteness");
    if let Some(c) = cloud.colors() {
        out = out.with_colors(c.to_vec()).unwrap();
    }
    if let Some(s) = cloud.scalars() {
        out = out.with_scalars(s.to_vec()).unwrap();
    }
    out
}

/// Least-squares rigid transform for source→target point pairs, solved in
/// closed form via SVD of the cross-covariance matrix. A reflection-optimal
/// configuration is corrected to a proper rotation by flipping the smallest
/// singular direction.
pub fn rigid_from_point_pairs(pairs: &[(Point3<f64>, Point3<f64>)]) -> Result<RigidTransform> {
    if pairs.len() < 3 {
        return Err(Error::Underdetermined(format!(
            "need at least 3 point pairs, got {}",
            pairs.len()
        )));
    }

    let n = pairs.len() as f64;
    let src_centroid: Vector3<f64> = pairs.iter().map(|(s, _)| s.coords).sum::<Vector3<f64>>() / n;
    let tgt_centroid: Vector3<f64> = pairs.iter().map(|(_, t)| t.coords).sum::<Vector3<f64>>() / n;

    let mut cross = Matrix3::zeros();
    let mut src_scatter = Matrix3::zeros();
    for (s, t) in pairs {
        let sc = s.coords - src_centroid;
        let tc = t.coords - tgt_centroid;
        cross += tc * sc.transpose();
        src_scatter += sc * sc.transpose();
    }

    // Collinear (or coincident) sources leave the rotation about the line
    // unconstrained.
    let scatter_svd = SVD::new(src_scatter, false, false);
    let sv = scatter_svd.singular_values;
    if sv[0] <= 0.0 || sv[1] / sv[0] < 1e-12 {
        return Err(Error::Underdetermined(
            "source points are collinear or coincident".into(),
        ));
    }

    let svd = SVD::new(cross, true, true);
    let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut rotation = u * v_t;
    if rotation.determinant() < 0.0 {
        let flip = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        rotation = u * flip * v_t;
    }
    let translation = tgt_centroid - rotation * src_centroid;
    Ok(RigidTransform {
        rotation,
        translation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(n: usize, rng: &mut ChaCha8Rng) -> Vec<Point3<f64>> {
        (0..n)
            .map(|_| {
                Point3::new(
                    rng.gen::<f64>() * 4.0 - 2.0,
                    rng.gen::<f64>() * 4.0 - 2.0,
                    rng.gen::<f64>() * 4.0 - 2.0,
                )
            })
            .collect()
    }

    fn random_transform(rng: &mut ChaCha8Rng) -> RigidTransform {
        let axis = Vector3::new(
            rng.gen::<f64>() - 0.5,
            rng.gen::<f64>() - 0.5,
            rng.gen::<f64>() - 0.5,
        );
        RigidTransform::from_axis_angle(
            axis,
            rng.gen::<f64>() * 360.0 - 180.0,
            Vector3::new(rng.gen(), rng.gen(), rng.gen()),
        )
    }

    #[test]
    fn identity_pairs_give_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts = random_points(5, &mut rng);
        let pairs: Vec<_> = pts.iter().map(|p| (*p, *p)).collect();
        let t = rigid_from_point_pairs(&pairs).unwrap();
        assert!((t.rotation - Matrix3::identity()).norm() < 1e-9);
        assert!(t.translation.norm() < 1e-9);
    }

    #[test]
    fn recovers_known_transform() {
        let truth = RigidTransform::from_axis_angle(
            Vector3::z(),
            10.0,
            Vector3::new(1.0, 2.0, 3.0),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let src = random_points(4, &mut rng);
        let pairs: Vec<_> = src.iter().map(|p| (*p, truth.apply(p))).collect();
        let solved = rigid_from_point_pairs(&pairs).unwrap();
        assert!((solved.rotation - truth.rotation).norm() < 1e-9);
        assert!((solved.translation - truth.translation).norm() < 1e-9);
    }

    #[test]
    fn collinear_sources_rejected() {
        let pairs: Vec<_> = (0..4)
            .map(|i| {
                let p = Point3::new(i as f64, 2.0 * i as f64, 0.0);
                (p, p)
            })
            .collect();
        assert!(matches!(
            rigid_from_point_pairs(&pairs),
            Err(Error::Underdetermined(_))
        ));
    }

    #[test]
    fn too_few_pairs_rejected() {
        let p = Point3::origin();
        assert!(rigid_from_point_pairs(&[(p, p), (p, p)]).is_err());
    }

    #[test]
    fn residual_beats_random_transforms() {
        // Global-optimality spot check against 10,000 random rigid motions.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let src = random_points(12, &mut rng);
        let truth = random_transform(&mut rng);
        let pairs: Vec<_> = src
            .iter()
            .map(|p| {
                let mut q = truth.apply(p);
                q.x += (rng.gen::<f64>() - 0.5) * 0.02; // mild noise
                (*p, q)
            })
            .collect();
        let solved = rigid_from_point_pairs(&pairs).unwrap();
        let residual = |t: &RigidTransform| -> f64 {
            pairs.iter().map(|(s, g)| (t.apply(s) - g).norm_squared()).sum()
        };
        let best = residual(&solved);
        for _ in 0..10_000 {
            assert!(residual(&random_transform(&mut rng)) >= best);
        }
    }

    #[test]
    fn apply_preserves_pairwise_distances() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cloud = PointCloud::new(random_points(50, &mut rng)).unwrap();
        let t = random_transform(&mut rng);
        let moved = apply_transform(&cloud, &t);
        for i in 0..cloud.len() {
            for j in (i + 1)..cloud.len() {
                let before = (cloud.points()[i] - cloud.points()[j]).norm();
                let after = (moved.points()[i] - moved.points()[j]).norm();
                assert!((before - after).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn inverse_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cloud = PointCloud::new(random_points(20, &mut rng)).unwrap();
        let t = random_transform(&mut rng);
        let back = apply_transform(&apply_transform(&cloud, &t), &t.inverse());
        for (a, b) in cloud.points().iter().zip(back.points()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn composition_stays_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut t = RigidTransform::identity();
        for _ in 0..10_000 {
            t = t.compose(&random_transform(&mut rng));
        }
        let drift = (t.rotation.transpose() * t.rotation - Matrix3::identity()).norm();
        assert!(drift < 1e-9, "orthonormality drift {drift}");
    }
}
