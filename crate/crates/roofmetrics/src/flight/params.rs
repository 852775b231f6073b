use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::BoundingRegion;

/// Camera parameters of the survey platform.
///
/// `capture_interval` is the minimum time between captures in seconds per
/// capture, so that speed times interval is meters of along-track advance.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CameraModel {
    /// Focal length (meters).
    pub focal_length: f64,
    /// Size of a pixel on the sensor (meters per pixel).
    pub pixel_pitch: f64,
    /// Image width (pixels).
    pub image_width: u32,
    /// Image height (pixels).
    pub image_height: u32,
    /// Seconds per capture.
    pub capture_interval: f64,
    /// Camera tilt from nadir (degrees, in [0, 90)).
    #[serde(default = "default_oblique")]
    pub oblique_angle_deg: f64,
}

fn default_oblique() -> f64 {
    45.0
}

impl CameraModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.focal_length > 0.0) || !(self.pixel_pitch > 0.0) {
            return Err(Error::InvalidParam(
                "focal length and pixel pitch must be positive".into(),
            ));
        }
        if self.image_width < 1 || self.image_height < 1 {
            return Err(Error::InvalidParam("image dimensions must be >= 1".into()));
        }
        if !(self.capture_interval > 0.0) {
            return Err(Error::InvalidParam("capture interval must be positive".into()));
        }
        if !(0.0..90.0).contains(&self.oblique_angle_deg) {
            return Err(Error::InvalidParam(
                "oblique angle must be in [0, 90) degrees".into(),
            ));
        }
        Ok(())
    }
}

/// Mission-level knobs: target resolution, overlaps, speed, footprint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MissionParams {
    /// Target ground sampling distance (meters per pixel).
    pub target_gsd: f64,
    /// Front (along-track) overlap, percent in [0, 100).
    pub front_overlap_pct: f64,
    /// Side (cross-track) overlap, percent in [0, 100).
    pub side_overlap_pct: f64,
    /// Cruise speed cap (meters per second).
    pub speed: f64,
    /// Survey footprint.
    pub region: BoundingRegion,
    /// Surface elevation above ground level (meters).
    pub surface_elevation: f64,
    /// Use the image height for the cross-track footprint instead of the
    /// width.
    #[serde(default)]
    pub side_uses_image_height: bool,
}

impl MissionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_gsd > 0.0) {
            return Err(Error::InvalidParam("target GSD must be positive".into()));
        }
        for ol in [self.front_overlap_pct, self.side_overlap_pct] {
            if !(0.0..100.0).contains(&ol) {
                return Err(Error::InvalidParam(format!(
                    "overlap must be in [0, 100), got {ol}"
                )));
            }
        }
        if !(self.speed > 0.0) {
            return Err(Error::InvalidParam("speed must be positive".into()));
        }
        Ok(())
    }
}

/// Ground sampling distance at camera-to-surface distance `z`:
/// GSD = z * pixel_pitch / focal_length (meters per pixel).
pub fn compute_gsd(camera: &CameraModel, z: f64) -> f64 {
    z * camera.pixel_pitch / camera.focal_length
}

/// Camera-to-surface distance that yields `gsd`.
pub fn distance_for_gsd(camera: &CameraModel, gsd: f64) -> f64 {
    gsd * camera.focal_length / camera.pixel_pitch
}

/// Front overlap percentage for the given resolution and speed:
/// 100 * (footprint - advance) / footprint, where footprint = gsd * width
/// and advance = speed * capture_interval.
///
/// Negative when the per-capture advance exceeds the footprint; reported
/// as-is with a warning.
pub fn front_overlap(camera: &CameraModel, gsd: f64, speed: f64) -> f64 {
    let footprint = gsd * camera.image_width as f64;
    let advance = speed * camera.capture_interval;
    let ol = 100.0 * (footprint - advance) / footprint;
    if ol < 0.0 {
        log::warn!(
            "per-capture advance {advance:.2} m exceeds image footprint {footprint:.2} m; \
             front overlap is negative ({ol:.1}%)"
        );
    }
    ol
}

/// Speed achieving the requested front overlap at resolution `gsd`.
pub fn speed_for_overlap(camera: &CameraModel, target_overlap_pct: f64, gsd: f64) -> Result<f64> {
    if target_overlap_pct >= 100.0 {
        return Err(Error::InvalidParam(
            "100% front overlap requires zero speed".into(),
        ));
    }
    if !(0.0..100.0).contains(&target_overlap_pct) {
        return Err(Error::InvalidParam(format!(
            "overlap must be in [0, 100), got {target_overlap_pct}"
        )));
    }
    let footprint = gsd * camera.image_width as f64;
    Ok(footprint * (1.0 - target_overlap_pct / 100.0) / camera.capture_interval)
}

/// Distance between consecutive parallel passes for the requested side
/// overlap. The cross-track footprint uses the image width unless
/// `use_image_height` is set.
pub fn side_spacing(
    camera: &CameraModel,
    gsd: f64,
    side_overlap_pct: f64,
    use_image_height: bool,
) -> f64 {
    let pixels = if use_image_height {
        camera.image_height
    } else {
        camera.image_width
    };
    gsd * pixels as f64 * (1.0 - side_overlap_pct / 100.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 1-inch 20 MP sensor: 13.2 mm wide over 5472 px gives ~2.41 um pitch.
    pub(crate) fn phantom_camera() -> CameraModel {
        CameraModel {
            focal_length: 8.8e-3,
            pixel_pitch: 2.41e-6,
            image_width: 5472,
            image_height: 3648,
            capture_interval: 2.0,
            oblique_angle_deg: 45.0,
        }
    }

    #[test]
    fn gsd_zero_at_zero_distance() {
        assert_eq!(compute_gsd(&phantom_camera(), 0.0), 0.0);
    }

    #[test]
    fn gsd_fixture_matches_hand_arithmetic() {
        // 18.6 * 2.41e-6 / 8.8e-3, evaluated in a different order.
        let expected = (18.6 / 8.8e-3) * 2.41e-6;
        let gsd = compute_gsd(&phantom_camera(), 18.6);
        assert!((gsd - expected).abs() / expected < 1e-12);
        // ~0.51 cm per pixel.
        assert!((gsd * 100.0 - 0.51).abs() < 0.005);
    }

    #[test]
    fn gsd_is_linear_in_distance() {
        let cam = phantom_camera();
        let g1 = compute_gsd(&cam, 12.3);
        let g2 = compute_gsd(&cam, 24.6);
        assert!((g2 - 2.0 * g1).abs() < 1e-15);
    }

    #[test]
    fn distance_fixture() {
        // gsd = 1.01 cm -> Z ~ 36.9 m.
        let z = distance_for_gsd(&phantom_camera(), 1.01e-2);
        assert!((z - 36.879) < 0.01, "Z = {z}");
    }

    #[test]
    fn gsd_distance_round_trip() {
        let cam = phantom_camera();
        for i in 1..=100 {
            let z = i as f64 * 0.73;
            let back = distance_for_gsd(&cam, compute_gsd(&cam, z));
            assert!((back - z).abs() / z < 1e-12);
        }
    }

    #[test]
    fn overlap_is_full_at_zero_speed() {
        assert_eq!(front_overlap(&phantom_camera(), 0.01, 0.0), 100.0);
    }

    #[test]
    fn overlap_fixture() {
        // Footprint 54.72 m, advance 10 m -> 81.72%.
        let ol = front_overlap(&phantom_camera(), 0.01, 5.0);
        let expected = 100.0 * (54.72 - 10.0) / 54.72;
        assert!((ol - expected).abs() < 1e-9);
        assert!((ol - 81.72).abs() < 0.01);
    }

    #[test]
    fn overlap_zero_when_advance_equals_footprint() {
        let cam = phantom_camera();
        let footprint = 0.01 * cam.image_width as f64;
        let speed = footprint / cam.capture_interval;
        assert!(front_overlap(&cam, 0.01, speed).abs() < 1e-9);
    }

    #[test]
    fn speed_for_overlap_inverts_front_overlap() {
        let cam = phantom_camera();
        let v = speed_for_overlap(&cam, 81.72514619883041, 0.01).unwrap();
        assert!((v - 5.0).abs() < 1e-9);
        for i in 0..100 {
            let target = i as f64;
            let v = speed_for_overlap(&cam, target, 0.0123).unwrap();
            assert!((front_overlap(&cam, 0.0123, v) - target).abs() < 1e-9);
        }
    }

    #[test]
    fn full_overlap_requires_zero_speed() {
        assert!(speed_for_overlap(&phantom_camera(), 100.0, 0.01).is_err());
    }

    #[test]
    fn side_spacing_cases() {
        let cam = phantom_camera();
        assert!((side_spacing(&cam, 0.01, 0.0, false) - 54.72).abs() < 1e-9);
        assert!((side_spacing(&cam, 0.01, 50.0, false) - 27.36).abs() < 1e-9);
        assert!((side_spacing(&cam, 0.01, 85.0, false) - 8.208).abs() < 1e-9);
    }
}
