//! Survey flight planning: ground sampling distance and overlap relations,
//! pass spacing, double-grid boustrophedon paths, and flight estimates.

mod grid;
mod params;

pub use grid::{estimate_flight, generate_double_grid, FlightEstimate, FlightPlan, Waypoint};
pub use params::{
    compute_gsd, distance_for_gsd, front_overlap, side_spacing, speed_for_overlap, CameraModel,
    MissionParams,
};
