//! Deterministic synthetic rooftop scenes and controlled degradation, used
//! as ground-truth oracles for registration and metrics tests.

mod degrade;
mod scene;

pub use degrade::{degrade, DegradeSpec, HalfSpace};
pub use scene::{generate_scene, Feature, RoofSegment, Scene, SceneSpec};
