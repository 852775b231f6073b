use nalgebra::Point3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{PointCloud, SpatialIndex};
use crate::register::{rigid_from_point_pairs, RigidTransform};

/// Trimmed point-to-point ICP settings.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IcpOptions {
    pub max_iterations: usize,
    /// Stop once the inlier RMSE changes by less than this (meters).
    pub convergence_threshold: f64,
    /// Correspondences beyond this distance are ignored (meters).
    pub max_correspondence_distance: f64,
    /// Upper bound on the fraction of worst correspondences discarded each
    /// iteration (only pairs far outside the inlier scale are cut).
    pub trim_fraction: f64,
}

impl Default for IcpOptions {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            convergence_threshold: 1e-6,
            max_correspondence_distance: 1.0,
            trim_fraction: 0.1,
        }
    }
}

impl IcpOptions {
    fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::InvalidParam("max_iterations must be >= 1".into()));
        }
        if !(self.convergence_threshold > 0.0) || !(self.max_correspondence_distance > 0.0) {
            return Err(Error::InvalidParam("ICP thresholds must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.trim_fraction) {
            return Err(Error::InvalidParam("trim_fraction must be in [0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegistrationResult {
    /// Full source→target transform (the initial guess already composed in).
    pub transform: RigidTransform,
    /// RMSE over inlier correspondences at the last iteration (meters).
    pub final_rmse: f64,
    pub iterations_used: usize,
    pub converged: bool,
    /// Inlier RMSE after each solve, for convergence diagnostics.
    pub rmse_history: Vec<f64>,
}

/// Refines `init` by alternating nearest-neighbor correspondence search
/// against `target`, trimming the worst `trim_fraction`, and re-solving the
/// rigid least-squares problem, until the inlier RMSE change drops below
/// the convergence threshold or the iteration cap is hit.
pub fn icp_refine(
    source: &PointCloud,
    target: &SpatialIndex,
    init: &RigidTransform,
    opts: &IcpOptions,
) -> Result<RegistrationResult> {
    opts.validate()?;
    init.validate()?;
    if source.is_empty() {
        return Err(Error::EmptyCloud("ICP source cloud is empty"));
    }

    let mut current = *init;
    let mut prev_rmse = f64::INFINITY;
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for iter in 0..opts.max_iterations {
        iterations = iter + 1;

        // Correspondences under the current estimate.
        let mut matches: Vec<(usize, usize, f64)> = source
            .points()
            .par_iter()
            .enumerate()
            .filter_map(|(si, p)| {
                let moved = current.apply(p);
                let (ti, dist) = target.nearest(&moved);
                (dist <= opts.max_correspondence_distance).then_some((si, ti, dist))
            })
            .collect();

        if matches.is_empty() {
            return Err(Error::NoOverlap {
                max_distance: opts.max_correspondence_distance,
                iteration: iter,
                last_valid: Box::new(RegistrationResult {
                    transform: current,
                    final_rmse: prev_rmse,
                    iterations_used: iter,
                    converged: false,
                    rmse_history: history,
                }),
            });
        }

        // Trim up to the worst fraction, keeping at least 3 pairs for the
        // solve. Only correspondences that stand apart from the inlier scale
        // (beyond 5x the median distance) are discarded: blindly cutting the
        // tail of a coherent residual field removes exactly the pairs that
        // carry the alignment signal and stalls convergence.
        matches.sort_unstable_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)));
        let keep_floor = (((matches.len() as f64) * (1.0 - opts.trim_fraction)).ceil() as usize)
            .clamp(3.min(matches.len()), matches.len());
        let gate = 5.0 * matches[matches.len() / 2].2;
        while matches.len() > keep_floor && matches.last().unwrap().2 > gate {
            matches.pop();
        }

        let pairs: Vec<(Point3<f64>, Point3<f64>)> = matches
            .iter()
            .map(|&(si, ti, _)| (source.points()[si], target.points()[ti]))
            .collect();
        current = rigid_from_point_pairs(&pairs)?.renormalized();

        let sse: f64 = pairs
            .iter()
            .map(|(s, t)| (current.apply(s) - t).norm_squared())
            .sum();
        let rmse = (sse / pairs.len() as f64).sqrt();
        history.push(rmse);

        if (prev_rmse - rmse).abs() < opts.convergence_threshold {
            converged = true;
            break;
        }
        prev_rmse = rmse;
    }

    Ok(RegistrationResult {
        transform: current,
        final_rmse: *history.last().unwrap(),
        iterations_used: iterations,
        converged,
        rmse_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Blocky test scene with enough shape to pin down all six degrees of
    /// freedom.
    fn roof_cloud(n: usize, seed: u64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = (0..n)
            .map(|_| {
                let x = rng.gen::<f64>() * 10.0;
                let y = rng.gen::<f64>() * 8.0;
                let z = if x < 4.0 { 3.0 } else { 5.0 }
                    + if y > 6.0 { 1.5 } else { 0.0 }
                    + 0.05 * (x * 2.1).sin() * (y * 1.7).cos();
                Point3::new(x, y, z)
            })
            .collect();
        PointCloud::new(pts).unwrap()
    }

    #[test]
    fn aligned_clouds_converge_immediately() {
        let cloud = roof_cloud(2000, 1);
        let index = SpatialIndex::build(&cloud).unwrap();
        let result =
            icp_refine(&cloud, &index, &RigidTransform::identity(), &IcpOptions::default())
                .unwrap();
        assert!(result.converged);
        assert!(result.iterations_used <= 2);
        assert!(result.final_rmse < 1e-9);
    }

    #[test]
    fn recovers_small_perturbation() {
        let target = roof_cloud(5000, 2);
        let perturb =
            RigidTransform::from_axis_angle(Vector3::z(), 5.0, Vector3::new(0.2, -0.1, 0.05));
        let source = crate::register::apply_transform(&target, &perturb);
        let index = SpatialIndex::build(&target).unwrap();
        let result =
            icp_refine(&source, &index, &RigidTransform::identity(), &IcpOptions::default())
                .unwrap();
        // The recovered transform should map the source back onto the target.
        let truth = perturb.inverse();
        let rmse: f64 = (source
            .points()
            .iter()
            .map(|p| (result.transform.apply(p) - truth.apply(p)).norm_squared())
            .sum::<f64>()
            / source.len() as f64)
            .sqrt();
        assert!(rmse < 1e-3, "point-transfer RMSE {rmse}");
    }

    #[test]
    fn tolerates_dropout_with_trimming() {
        let target = roof_cloud(8000, 3);
        let perturb =
            RigidTransform::from_axis_angle(Vector3::x(), 3.0, Vector3::new(0.1, 0.1, -0.05));
        let moved = crate::register::apply_transform(&target, &perturb);
        // 30% dropout on the source side.
        let keep: Vec<usize> = (0..moved.len()).filter(|i| i % 10 >= 3).collect();
        let source = moved.select(&keep);
        let index = SpatialIndex::build(&target).unwrap();
        let opts = IcpOptions {
            trim_fraction: 0.2,
            ..Default::default()
        };
        let result = icp_refine(&source, &index, &RigidTransform::identity(), &opts).unwrap();
        let truth = perturb.inverse();
        let rmse: f64 = (source
            .points()
            .iter()
            .map(|p| (result.transform.apply(p) - truth.apply(p)).norm_squared())
            .sum::<f64>()
            / source.len() as f64)
            .sqrt();
        assert!(rmse < 5e-3, "point-transfer RMSE {rmse}");
    }

    #[test]
    fn rmse_sequence_is_non_increasing() {
        let target = roof_cloud(3000, 4);
        let perturb =
            RigidTransform::from_axis_angle(Vector3::y(), 4.0, Vector3::new(0.15, 0.0, 0.1));
        let source = crate::register::apply_transform(&target, &perturb);
        let index = SpatialIndex::build(&target).unwrap();
        let opts = IcpOptions {
            trim_fraction: 0.0,
            max_correspondence_distance: 100.0,
            ..Default::default()
        };
        let result = icp_refine(&source, &index, &RigidTransform::identity(), &opts).unwrap();
        for w in result.rmse_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "RMSE increased: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn disjoint_clouds_report_no_overlap() {
        let a = roof_cloud(200, 5);
        let far: Vec<_> = a
            .points()
            .iter()
            .map(|p| Point3::new(p.x + 1000.0, p.y, p.z))
            .collect();
        let b = PointCloud::new(far).unwrap();
        let index = SpatialIndex::build(&b).unwrap();
        let err = icp_refine(&a, &index, &RigidTransform::identity(), &IcpOptions::default())
            .unwrap_err();
        assert!(matches!(err, Error::NoOverlap { iteration: 0, .. }));
    }
}
