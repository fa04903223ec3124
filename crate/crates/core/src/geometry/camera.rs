use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{Pose3D, Vec2, Vec3};

const MAX_UNDISTORT_ITERATIONS: usize = 20;
const UNDISTORT_TOLERANCE: f64 = 1e-10;

/// Pinhole camera with a two-term radial distortion model.
///
/// Camera frame: +z along the optical axis, +x to the image right, +y to the
/// image bottom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics<T> {
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
    pub k1: T,
    pub k2: T,
    pub width: T,
    pub height: T,
}

/// A world-space ray with unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray<T> {
    pub origin: Vec3<T>,
    pub direction: Vec3<T>,
}

impl<T: Real> CameraIntrinsics<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(fx: T, fy: T, cx: T, cy: T, k1: T, k2: T, width: T, height: T) -> Result<Self> {
        let intr = Self { fx, fy, cx, cy, k1, k2, width, height };
        intr.validate()?;
        Ok(intr)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.fx, self.fy, self.cx, self.cy, self.k1, self.k2, self.width, self.height];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("intrinsics must be finite".into()));
        }
        if !(self.fx > T::zero() && self.fy > T::zero()) {
            return Err(Error::Invalid("focal lengths must be positive".into()));
        }
        if self.cx < T::zero() || self.cx > self.width || self.cy < T::zero() || self.cy > self.height {
            return Err(Error::Invalid("principal point outside the sensor".into()));
        }
        Ok(())
    }

    pub fn has_distortion(&self) -> bool {
        self.k1 != T::zero() || self.k2 != T::zero()
    }

    pub fn contains(&self, pixel: Vec2<T>) -> bool {
        pixel.x >= T::zero() && pixel.x <= self.width && pixel.y >= T::zero() && pixel.y <= self.height
    }

    fn radial_factor(&self, r2: T) -> T {
        T::one() + self.k1 * r2 + self.k2 * r2 * r2
    }

    /// Normalized undistorted image coordinates to pixels.
    pub fn normalized_to_pixel(&self, n: Vec2<T>) -> Vec2<T> {
        let f = self.radial_factor(n.norm_squared());
        Vec2::new(self.fx * n.x * f + self.cx, self.fy * n.y * f + self.cy)
    }

    /// Pixels to normalized undistorted image coordinates.
    pub fn pixel_to_normalized(&self, pixel: Vec2<T>) -> Result<Vec2<T>> {
        let d = Vec2::new((pixel.x - self.cx) / self.fx, (pixel.y - self.cy) / self.fy);
        if !self.has_distortion() {
            return Ok(d);
        }
        let rd = d.norm();
        if rd == T::zero() {
            return Ok(d);
        }
        // Newton on r * (1 + k1 r^2 + k2 r^4) = rd
        let (k1, k2) = (self.k1, self.k2);
        let (three, five) = (T::lit(3.0), T::lit(5.0));
        let tol = T::tol(UNDISTORT_TOLERANCE);
        let mut r = rd;
        for _ in 0..MAX_UNDISTORT_ITERATIONS {
            let r2 = r * r;
            let g = r * (T::one() + k1 * r2 + k2 * r2 * r2) - rd;
            let dg = T::one() + three * k1 * r2 + five * k2 * r2 * r2;
            if !(dg > T::zero()) {
                break;
            }
            let step = g / dg;
            r = r - step;
            if !r.is_finite() {
                break;
            }
            if step.abs() <= tol * rd.max(T::one()) {
                return Ok(d.scale(r / rd));
            }
        }
        Err(Error::DistortionInversion {
            x: pixel.x.to_f64().unwrap_or(f64::NAN),
            y: pixel.y.to_f64().unwrap_or(f64::NAN),
        })
    }

    /// Projects a camera-frame point; `None` when it is not in front of the camera.
    pub fn project_camera_point(&self, p: Vec3<T>) -> Option<Vec2<T>> {
        if !(p.z > T::zero()) {
            return None;
        }
        Some(self.normalized_to_pixel(Vec2::new(p.x / p.z, p.y / p.z)))
    }

    /// Projects a world point seen from `pose`.
    pub fn project(&self, pose: &Pose3D<T>, world: Vec3<T>) -> Option<Vec2<T>> {
        self.project_camera_point(pose.inverse_transform_point(world))
    }
}

/// Back-projects a pixel into a world-space viewing ray from the camera center.
pub fn pixel_to_ray<T: Real>(intr: &CameraIntrinsics<T>, pose: &Pose3D<T>, pixel: Vec2<T>) -> Result<Ray<T>> {
    let n = intr.pixel_to_normalized(pixel)?;
    let cam = Vec3::new(n.x, n.y, T::one());
    let direction = pose
        .rotation
        .rotate(cam)
        .normalized()
        .ok_or_else(|| Error::DegenerateGeometry("zero-length viewing ray".into()))?;
    Ok(Ray { origin: pose.position, direction })
}
