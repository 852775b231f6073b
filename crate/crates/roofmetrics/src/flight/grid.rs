use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::flight::{distance_for_gsd, side_spacing, speed_for_overlap, CameraModel, MissionParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    /// Local ENU position (meters).
    pub position: [f64; 3],
    /// Travel heading, degrees counter-clockwise from +x.
    pub heading_deg: f64,
    /// Camera trigger at this waypoint.
    pub trigger: bool,
}

/// A double-grid boustrophedon survey path.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlightPlan {
    pub waypoints: Vec<Waypoint>,
    /// Distance between consecutive same-direction passes (meters).
    pub pass_spacing: f64,
    /// Along-track distance between camera triggers (meters).
    pub trigger_spacing: f64,
    /// Altitude above ground level (meters).
    pub flight_altitude: f64,
    /// Cruise speed used for trigger spacing and timing (meters/second).
    pub cruise_speed: f64,
    /// The two perpendicular pass headings (degrees).
    pub grid_headings: [f64; 2],
    /// Pass count in each grid.
    pub passes_per_grid: [usize; 2],
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FlightEstimate {
    pub duration_min: f64,
    pub capture_count: usize,
    pub path_length_m: f64,
}

/// Plans two boustrophedon lawnmower grids at perpendicular headings over
/// the mission footprint.
///
/// The altitude is chosen so the slant distance along the optical axis (at
/// the camera's oblique angle) yields the target GSD at the surface. Camera
/// triggers are spaced to achieve the requested front overlap; the cruise
/// speed is capped so the capture interval can keep up.
pub fn generate_double_grid(
    mission: &MissionParams,
    camera: &CameraModel,
) -> Result<FlightPlan> {
    camera.validate()?;
    mission.validate()?;

    let gsd = mission.target_gsd;
    let spacing = side_spacing(camera, gsd, mission.side_overlap_pct, mission.side_uses_image_height);

    let slant = distance_for_gsd(camera, gsd);
    let altitude =
        mission.surface_elevation + slant * camera.oblique_angle_deg.to_radians().cos();

    // Cap the cruise speed so the camera interval achieves the overlap.
    let overlap_speed = speed_for_overlap(camera, mission.front_overlap_pct, gsd)?;
    let cruise = mission.speed.min(overlap_speed);
    let trigger_spacing = cruise * camera.capture_interval;

    let (x_min, y_min, x_max, y_max) = mission.region.footprint_bounds();
    let mut waypoints = Vec::new();

    // Grid A: passes parallel to +x, stepped in y.
    let passes_a = lawnmower(
        &mut waypoints,
        (x_min, x_max),
        (y_min, y_max),
        spacing,
        trigger_spacing,
        altitude,
        false,
    );
    // Grid B: perpendicular, passes parallel to +y, stepped in x.
    let passes_b = lawnmower(
        &mut waypoints,
        (y_min, y_max),
        (x_min, x_max),
        spacing,
        trigger_spacing,
        altitude,
        true,
    );

    Ok(FlightPlan {
        waypoints,
        pass_spacing: spacing,
        trigger_spacing,
        flight_altitude: altitude,
        cruise_speed: cruise,
        grid_headings: [0.0, 90.0],
        passes_per_grid: [passes_a, passes_b],
    })
}

/// Appends one lawnmower grid. `along` is the interval swept by each pass,
/// `across` the interval stepped by `spacing`. With `swap_axes` the pass
/// direction is +y instead of +x. Returns the pass count.
fn lawnmower(
    waypoints: &mut Vec<Waypoint>,
    along: (f64, f64),
    across: (f64, f64),
    spacing: f64,
    trigger_spacing: f64,
    altitude: f64,
    swap_axes: bool,
) -> usize {
    let along_len = along.1 - along.0;
    let across_len = across.1 - across.0;

    let passes = if across_len < spacing {
        log::warn!(
            "region extent {across_len:.2} m is smaller than the pass spacing {spacing:.2} m; \
             emitting a single-pass degenerate grid"
        );
        1
    } else {
        // Tolerate float noise in the spacing so e.g. 50 m / 10 m stays 5.
        (across_len / spacing - 1e-9).ceil() as usize + 1
    };

    for k in 0..passes {
        let cross = across.0 + k as f64 * spacing;
        let reverse = k % 2 == 1;
        let heading = match (swap_axes, reverse) {
            (false, false) => 0.0,
            (false, true) => 180.0,
            (true, false) => 90.0,
            (true, true) => 270.0,
        };

        // Trigger stations along the pass, endpoint included.
        let mut stations = Vec::new();
        let mut s = 0.0;
        while s < along_len {
            stations.push(s);
            s += trigger_spacing;
        }
        stations.push(along_len);

        for &s in &stations {
            let a = if reverse { along.1 - s } else { along.0 + s };
            let (x, y) = if swap_axes { (cross, a) } else { (a, cross) };
            waypoints.push(Waypoint {
                position: [x, y, altitude],
                heading_deg: heading,
                trigger: true,
            });
        }
    }
    passes
}

/// Duration, capture count, and path length for a plan. Turn overhead is
/// charged once per pass-to-pass transition.
pub fn estimate_flight(plan: &FlightPlan, turn_overhead_s: f64) -> FlightEstimate {
    let path_length_m: f64 = plan
        .waypoints
        .windows(2)
        .map(|w| {
            let a = Point3::from(w[0].position);
            let b = Point3::from(w[1].position);
            (b - a).norm()
        })
        .sum();
    let capture_count = plan.waypoints.iter().filter(|w| w.trigger).count();
    let turns = plan.passes_per_grid.iter().sum::<usize>().saturating_sub(1);
    let duration_s = if plan.cruise_speed > 0.0 && path_length_m > 0.0 {
        path_length_m / plan.cruise_speed + turns as f64 * turn_overhead_s
    } else {
        0.0
    };
    FlightEstimate {
        duration_min: duration_s / 60.0,
        capture_count: if path_length_m > 0.0 { capture_count } else { 0 },
        path_length_m,
    }
}
