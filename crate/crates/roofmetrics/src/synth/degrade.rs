use nalgebra::{Point3, Vector3};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::PointCloud;
use crate::register::{apply_transform, RigidTransform};

/// Controlled degradation of a cloud: occlusion clipping, dropout,
/// isotropic Gaussian noise, then a rigid perturbation whose exact value is
/// returned for oracle comparisons.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DegradeSpec {
    /// Per-axis Gaussian noise sigma (meters).
    pub noise_sigma: f64,
    /// Fraction of points removed, in [0, 1).
    pub dropout: f64,
    /// Rigid perturbation applied last.
    pub perturbation: RigidTransform,
    /// Points with normal . p > offset are clipped away, simulating
    /// obstacle-blocking and self-shadowing.
    #[serde(default)]
    pub occlusions: Vec<HalfSpace>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HalfSpace {
    pub normal: [f64; 3],
    pub offset: f64,
}

impl Default for DegradeSpec {
    fn default() -> Self {
        Self {
            noise_sigma: 0.0,
            dropout: 0.0,
            perturbation: RigidTransform::identity(),
            occlusions: vec![],
        }
    }
}

/// Applies the degradation and returns the degraded cloud together with the
/// true perturbation transform. The retained point count after dropout is
/// deterministic: exactly `round(n * (1 - dropout))` survivors.
pub fn degrade(
    cloud: &PointCloud,
    spec: &DegradeSpec,
    seed: u64,
) -> Result<(PointCloud, RigidTransform)> {
    if !(0.0..1.0).contains(&spec.dropout) {
        return Err(Error::InvalidParam("dropout must be in [0, 1)".into()));
    }
    if spec.noise_sigma < 0.0 {
        return Err(Error::InvalidParam("noise sigma must be >= 0".into()));
    }
    spec.perturbation.validate()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Occlusion clipping first.
    let visible: Vec<usize> = (0..cloud.len())
        .filter(|&i| {
            let p = &cloud.points()[i];
            !spec.occlusions.iter().any(|h| {
                Vector3::from(h.normal).dot(&p.coords) > h.offset
            })
        })
        .collect();

    // Deterministic-count dropout: shuffle, truncate, restore input order.
    let keep_count = ((visible.len() as f64) * (1.0 - spec.dropout)).round() as usize;
    let mut chosen = visible;
    chosen.shuffle(&mut rng);
    chosen.truncate(keep_count);
    chosen.sort_unstable();
    let mut out = cloud.select(&chosen);

    if spec.noise_sigma > 0.0 {
        let noisy: Vec<Point3<f64>> = out
            .points()
            .iter()
            .map(|p| {
                let dx: f64 = rng.sample(StandardNormal);
                let dy: f64 = rng.sample(StandardNormal);
                let dz: f64 = rng.sample(StandardNormal);
                p + Vector3::new(dx, dy, dz) * spec.noise_sigma
            })
            .collect();
        let mut noisy_cloud = PointCloud::new(noisy)?;
        if let Some(c) = out.colors() {
            noisy_cloud = noisy_cloud.with_colors(c.to_vec())?;
        }
        out = noisy_cloud;
    }

    out = apply_transform(&out, &spec.perturbation);
    Ok((out, spec.perturbation))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_cloud(n: usize, seed: u64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PointCloud::new(
            (0..n)
                .map(|_| Point3::new(rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn noop_spec_is_identity() {
        let cloud = random_cloud(500, 1);
        let (out, t) = degrade(&cloud, &DegradeSpec::default(), 9).unwrap();
        assert_eq!(out, cloud);
        assert_eq!(t, RigidTransform::identity());
    }

    #[test]
    fn dropout_count_is_exact() {
        let cloud = random_cloud(10_000, 2);
        let spec = DegradeSpec {
            dropout: 0.3,
            ..Default::default()
        };
        let (out, _) = degrade(&cloud, &spec, 3).unwrap();
        assert_eq!(out.len(), 7000);
    }

    #[test]
    fn noise_magnitude_matches_chi_distribution_mean() {
        // E[|N(0, sigma^2 I3)|] = sigma * sqrt(2) * Gamma(2) / Gamma(1.5)
        //                       = sigma * 2 * sqrt(2/pi).
        let sigma = 0.005;
        let cloud = random_cloud(10_000, 4);
        let spec = DegradeSpec {
            noise_sigma: sigma,
            ..Default::default()
        };
        let (out, _) = degrade(&cloud, &spec, 5).unwrap();
        let mean: f64 = cloud
            .points()
            .iter()
            .zip(out.points())
            .map(|(a, b)| (a - b).norm())
            .sum::<f64>()
            / cloud.len() as f64;
        let expected = sigma * 2.0 * (2.0 / std::f64::consts::PI).sqrt();
        assert!(
            (mean - expected).abs() / expected < 0.05,
            "mean {mean}, expected {expected}"
        );
    }

    #[test]
    fn occlusion_clips_half_space() {
        let cloud = random_cloud(1000, 6);
        let spec = DegradeSpec {
            occlusions: vec![HalfSpace {
                normal: [1.0, 0.0, 0.0],
                offset: 0.5,
            }],
            ..Default::default()
        };
        let (out, _) = degrade(&cloud, &spec, 7).unwrap();
        assert!(out.points().iter().all(|p| p.x <= 0.5));
        assert!(out.len() < cloud.len());
    }

    #[test]
    fn degradation_is_deterministic() {
        let cloud = random_cloud(2000, 8);
        let spec = DegradeSpec {
            noise_sigma: 0.002,
            dropout: 0.25,
            perturbation: RigidTransform::from_axis_angle(
                Vector3::z(),
                4.0,
                Vector3::new(0.1, 0.2, 0.0),
            ),
            occlusions: vec![],
        };
        let (a, _) = degrade(&cloud, &spec, 11).unwrap();
        let (b, _) = degrade(&cloud, &spec, 11).unwrap();
        assert_eq!(a, b);
    }
}
