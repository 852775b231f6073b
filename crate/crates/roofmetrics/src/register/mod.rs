//! Rigid registration: closed-form alignment from point pairs and
//! trimmed point-to-point iterative closest point refinement.

mod icp;
mod transform;

pub use icp::{icp_refine, IcpOptions, RegistrationResult};
pub use transform::{apply_transform, rigid_from_point_pairs, RigidTransform};
