use std::ops::Mul;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{Mat3, Vec3};

const UNIT_TOLERANCE: f64 = 1e-6;

/// Rotation stored as a unit quaternion `w + xi + yj + zk`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitQuaternion<T> {
    w: T,
    x: T,
    y: T,
    z: T,
}

impl<T: Real> UnitQuaternion<T> {
    pub fn identity() -> Self {
        Self { w: T::one(), x: T::zero(), y: T::zero(), z: T::zero() }
    }

    /// Accepts components whose norm is within 1e-6 of one and renormalizes them.
    pub fn try_new(w: T, x: T, y: T, z: T) -> Result<Self> {
        let norm = (w * w + x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || (norm - T::one()).abs() > T::tol(UNIT_TOLERANCE) {
            return Err(Error::Normalization { norm: norm.to_f64().unwrap_or(f64::NAN) });
        }
        Ok(Self { w: w / norm, x: x / norm, y: y / norm, z: z / norm })
    }

    /// Normalizes arbitrary non-zero components.
    pub fn new_normalize(w: T, x: T, y: T, z: T) -> Result<Self> {
        let norm = (w * w + x * x + y * y + z * z).sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::Normalization { norm: norm.to_f64().unwrap_or(f64::NAN) });
        }
        Ok(Self { w: w / norm, x: x / norm, y: y / norm, z: z / norm })
    }

    pub fn from_axis_angle(axis: Vec3<T>, angle: T) -> Self {
        let Some(axis) = axis.normalized() else {
            return Self::identity();
        };
        let (s, c) = (angle / T::lit(2.0)).sin_cos();
        Self { w: c, x: axis.x * s, y: axis.y * s, z: axis.z * s }
    }

    /// From a rotation vector (axis scaled by angle in radians).
    pub fn from_rotation_vector(v: Vec3<T>) -> Self {
        let angle = v.norm();
        if angle == T::zero() {
            return Self::identity();
        }
        Self::from_axis_angle(v, angle)
    }

    /// From a proper orthonormal matrix (Shepperd's method).
    pub fn from_matrix(m: &Mat3<T>) -> Self {
        let r = &m.0;
        let (one, two, quarter) = (T::one(), T::lit(2.0), T::lit(0.25));
        let trace = r[0][0] + r[1][1] + r[2][2];
        let (w, x, y, z);
        if trace > T::zero() {
            let s = (trace + one).sqrt() * two;
            w = quarter * s;
            x = (r[2][1] - r[1][2]) / s;
            y = (r[0][2] - r[2][0]) / s;
            z = (r[1][0] - r[0][1]) / s;
        } else if r[0][0] > r[1][1] && r[0][0] > r[2][2] {
            let s = (one + r[0][0] - r[1][1] - r[2][2]).sqrt() * two;
            w = (r[2][1] - r[1][2]) / s;
            x = quarter * s;
            y = (r[0][1] + r[1][0]) / s;
            z = (r[0][2] + r[2][0]) / s;
        } else if r[1][1] > r[2][2] {
            let s = (one + r[1][1] - r[0][0] - r[2][2]).sqrt() * two;
            w = (r[0][2] - r[2][0]) / s;
            x = (r[0][1] + r[1][0]) / s;
            y = quarter * s;
            z = (r[1][2] + r[2][1]) / s;
        } else {
            let s = (one + r[2][2] - r[0][0] - r[1][1]).sqrt() * two;
            w = (r[1][0] - r[0][1]) / s;
            x = (r[0][2] + r[2][0]) / s;
            y = (r[1][2] + r[2][1]) / s;
            z = quarter * s;
        }
        Self::new_normalize(w, x, y, z).unwrap_or_else(|_| Self::identity())
    }

    pub fn w(&self) -> T {
        self.w
    }
    pub fn x(&self) -> T {
        self.x
    }
    pub fn y(&self) -> T {
        self.y
    }
    pub fn z(&self) -> T {
        self.z
    }

    pub fn components(&self) -> [T; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn norm(&self) -> T {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn conjugate(&self) -> Self {
        Self { w: self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    pub fn inverse(&self) -> Self {
        self.conjugate()
    }

    /// The same rotation with all components negated.
    pub fn negated(&self) -> Self {
        Self { w: -self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    pub fn dot(&self, o: &Self) -> T {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn rotate(&self, v: Vec3<T>) -> Vec3<T> {
        // v' = v + 2w (q x v) + 2 q x (q x v)
        let q = Vec3::new(self.x, self.y, self.z);
        let two = T::lit(2.0);
        let uv = q.cross(v);
        let uuv = q.cross(uv);
        v + uv.scale(two * self.w) + uuv.scale(two)
    }

    pub fn to_matrix(&self) -> Mat3<T> {
        let one = T::one();
        let two = T::lit(2.0);
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        Mat3([
            [one - two * (y * y + z * z), two * (x * y - w * z), two * (x * z + w * y)],
            [two * (x * y + w * z), one - two * (x * x + z * z), two * (y * z - w * x)],
            [two * (x * z - w * y), two * (y * z + w * x), one - two * (x * x + y * y)],
        ])
    }

    /// Rotation angle in `[0, pi]`.
    pub fn angle(&self) -> T {
        let v = (self.x * self.x + self.y * self.y + self.z * self.z).sqrt();
        T::lit(2.0) * v.atan2(self.w.abs())
    }

    /// Angle of the relative rotation `self^-1 * other`, in `[0, pi]`.
    pub fn angle_to(&self, other: &Self) -> T {
        (self.inverse() * *other).angle()
    }

    /// Twist angle about the local z axis (swing-twist decomposition).
    pub fn twist_about_z(&self) -> T {
        let mut a = T::lit(2.0) * self.z.atan2(self.w);
        if a > T::PI() {
            a = a - T::TAU();
        } else if a < -T::PI() {
            a = a + T::TAU();
        }
        a
    }
}

impl<T: Real> Mul for UnitQuaternion<T> {
    type Output = Self;

    /// Hamilton product; `(a * b).rotate(v) == a.rotate(b.rotate(v))`.
    fn mul(self, o: Self) -> Self {
        Self {
            w: self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            x: self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            y: self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            z: self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        }
    }
}

/// Constant angular velocity interpolation along the shorter arc.
///
/// `u = 0` returns `q0` exactly. Inputs must be unit length within 1e-6.
pub fn slerp<T: Real>(q0: &UnitQuaternion<T>, q1: &UnitQuaternion<T>, u: T) -> Result<UnitQuaternion<T>> {
    let q0 = UnitQuaternion::try_new(q0.w, q0.x, q0.y, q0.z)?;
    let mut q1 = UnitQuaternion::try_new(q1.w, q1.x, q1.y, q1.z)?;
    if !(u >= T::zero() && u <= T::one()) {
        return Err(Error::Invalid(format!("slerp fraction {u} outside [0, 1]")));
    }
    if q0.dot(&q1) < T::zero() {
        q1 = q1.negated();
    }
    let rel = q0.inverse() * q1;
    let v = Vec3::new(rel.x, rel.y, rel.z);
    let sin_half = v.norm();
    if sin_half == T::zero() {
        return Ok(q0);
    }
    let half = sin_half.atan2(rel.w);
    let axis = v.scale(sin_half.recip());
    let (s, c) = (half * u).sin_cos();
    let step = UnitQuaternion { w: c, x: axis.x * s, y: axis.y * s, z: axis.z * s };
    Ok(q0 * step)
}
