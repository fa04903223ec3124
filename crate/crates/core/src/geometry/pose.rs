use crate::error::Result;
use crate::scalar::Real;

use super::{slerp, UnitQuaternion, Vec3};

/// Camera pose: `rotation` maps camera-frame vectors into the world frame and
/// `position` is the camera center in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose3D<T> {
    pub rotation: UnitQuaternion<T>,
    pub position: Vec3<T>,
}

impl<T: Real> Pose3D<T> {
    pub fn new(rotation: UnitQuaternion<T>, position: Vec3<T>) -> Self {
        Self { rotation, position }
    }

    pub fn identity() -> Self {
        Self::new(UnitQuaternion::identity(), Vec3::zero())
    }

    /// Camera frame to world frame.
    pub fn transform_point(&self, p: Vec3<T>) -> Vec3<T> {
        self.rotation.rotate(p) + self.position
    }

    /// World frame to camera frame.
    pub fn inverse_transform_point(&self, p: Vec3<T>) -> Vec3<T> {
        self.rotation.inverse().rotate(p - self.position)
    }
}

/// Linear position and slerp rotation between two poses.
pub fn interpolate_pose<T: Real>(p0: &Pose3D<T>, p1: &Pose3D<T>, u: T) -> Result<Pose3D<T>> {
    let rotation = slerp(&p0.rotation, &p1.rotation, u)?;
    if u == T::zero() {
        return Ok(*p0);
    }
    let position = p0.position.scale(T::one() - u) + p1.position.scale(u);
    Ok(Pose3D::new(rotation, position))
}
