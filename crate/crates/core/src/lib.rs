//! Trajectory unwrapping for herds filmed from a moving drone.
//!
//! Image-space keypoint tracks are mapped into one ground-fixed frame either by
//! chaining frame-to-frame similarity transforms (`unwrap`, registration) or by
//! casting rays from structure-from-motion camera poses onto a fitted ground
//! plane (`unwrap`, SfM). `eval` scores the result by how far static landmarks
//! drift, `behavior` turns cleaned head/tail tracks into herd metrics, and
//! `synth` renders scenes with exact ground truth.
//!
//! Geometry is generic over the scalar; the aliases below fix it to `f64`,
//! which is what the track, evaluation and behavior layers use.

pub mod behavior;
pub mod cli;
pub mod error;
pub mod eval;
pub mod format;
pub mod geometry;
pub mod scalar;
pub mod synth;
pub mod tracks;
pub mod unwrap;

pub use error::{Error, Result};

pub type Vec2d = geometry::Vec2<f64>;
pub type Vec3d = geometry::Vec3<f64>;
pub type Rigid2d = geometry::Rigid2D<f64>;
pub type Quat = geometry::UnitQuaternion<f64>;
pub type Pose = geometry::Pose3D<f64>;
pub type Intrinsics = geometry::CameraIntrinsics<f64>;
pub type Plane3 = geometry::Plane<f64>;
pub type PlaneChart = geometry::PlaneBasis<f64>;
