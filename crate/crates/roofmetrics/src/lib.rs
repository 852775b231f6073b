//! Planning and evaluation toolkit for UAV rooftop photogrammetry surveys.
//!
//! Two halves:
//!
//! - **Flight planning** ([`flight`]): ground-sampling-distance and overlap
//!   relations, pass spacing, double-grid boustrophedon paths, and
//!   capture/duration estimates.
//! - **Model evaluation** ([`geom`], [`register`], [`metrics`]): mesh
//!   sampling, uniform-density subsampling, coarse + ICP rigid
//!   registration, cloud-to-cloud distances with a quadratic-height local
//!   surface model, and precision/recall/F-score reporting with threshold
//!   sweeps and flight rankings.
//!
//! [`synth`] generates deterministic rooftop scenes used as ground-truth
//! oracles, and [`io`] covers PLY/XYZ/OBJ files and CSV/SVG reports.

pub mod error;
pub mod flight;
pub mod geom;
pub mod io;
pub mod metrics;
pub mod register;
pub mod synth;

pub use error::{Error, Result};
