//! Geometric primitives shared by the unwrapping methods.
//!
//! Everything here is generic over [`Real`](crate::scalar::Real) and free of
//! external linear-algebra dependencies.

mod camera;
mod fit;
mod plane;
mod pose;
mod quaternion;
mod rigid2d;
mod vector;

pub use camera::{pixel_to_ray, CameraIntrinsics, Ray};
pub use fit::{rigid_fit_2d, rigid_residual};
pub use plane::{fit_plane, project_to_plane_2d, ray_plane_intersect, Plane, PlaneBasis};
pub use pose::{interpolate_pose, Pose3D};
pub use quaternion::{slerp, UnitQuaternion};
pub use rigid2d::{chain_to_frame0, compose_rigid2d, CumulativeChain, Rigid2D};
pub use vector::{symmetric_eigen3, Mat3, Vec2, Vec3};
