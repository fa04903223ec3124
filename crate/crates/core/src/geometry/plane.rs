use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{symmetric_eigen3, Mat3, Ray, Vec2, Vec3};

/// Plane `normal · p = offset` with unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane<T> {
    pub normal: Vec3<T>,
    pub offset: T,
}

/// Orthonormal 2D chart on a plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneBasis<T> {
    pub origin: Vec3<T>,
    pub u_axis: Vec3<T>,
    pub v_axis: Vec3<T>,
}

impl<T: Real> Plane<T> {
    pub fn new(normal: Vec3<T>, offset: T) -> Result<Self> {
        let n = normal
            .normalized()
            .ok_or_else(|| Error::DegenerateGeometry("zero plane normal".into()))?;
        let scale = normal.norm();
        Ok(Self { normal: n, offset: offset / scale })
    }

    /// The plane `z = 0`, normal +z.
    pub fn ground() -> Self {
        Self { normal: Vec3::unit_z(), offset: T::zero() }
    }

    pub fn signed_distance(&self, p: Vec3<T>) -> T {
        self.normal.dot(p) - self.offset
    }

    pub fn project_point(&self, p: Vec3<T>) -> Vec3<T> {
        p - self.normal.scale(self.signed_distance(p))
    }
}

/// Flips `n` so that z >= 0, breaking ties on y, then x.
fn canonical_sign<T: Real>(n: Vec3<T>) -> Vec3<T> {
    let zero = T::zero();
    let flip = n.z < zero || (n.z == zero && (n.y < zero || (n.y == zero && n.x < zero)));
    if flip {
        -n
    } else {
        n
    }
}

/// Total-least-squares plane through `points`.
pub fn fit_plane<T: Real>(points: &[Vec3<T>]) -> Result<Plane<T>> {
    if points.len() < 3 {
        return Err(Error::DegenerateGeometry(format!(
            "plane fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::Invalid("non-finite point in plane fit".into()));
    }
    let centroid = Vec3::mean(points).expect("non-empty");
    let mut cov = [[T::zero(); 3]; 3];
    for p in points {
        let d = (*p - centroid).to_array();
        for i in 0..3 {
            for j in 0..3 {
                cov[i][j] = cov[i][j] + d[i] * d[j];
            }
        }
    }
    let (values, vectors) = symmetric_eigen3(&Mat3(cov));
    let largest = values[2];
    if !(largest > T::zero()) || values[1] <= largest * T::tol(1e-12) {
        return Err(Error::DegenerateGeometry("points are coincident or collinear".into()));
    }
    let normal = canonical_sign(
        vectors[0]
            .normalized()
            .ok_or_else(|| Error::DegenerateGeometry("zero eigenvector".into()))?,
    );
    Ok(Plane { normal, offset: normal.dot(centroid) })
}

impl<T: Real> PlaneBasis<T> {
    /// Chart with `origin` projected onto the plane, `u` the projection of world
    /// x (world y when the normal is within 1e-6 of x), and `v = normal × u`.
    pub fn from_plane(plane: &Plane<T>, origin: Vec3<T>) -> Result<Self> {
        let n = plane.normal;
        let near_x = (T::one() - n.x.abs()) <= T::tol(1e-6);
        let seed = if near_x { Vec3::unit_y() } else { Vec3::unit_x() };
        let u_axis = (seed - n.scale(n.dot(seed)))
            .normalized()
            .ok_or_else(|| Error::DegenerateGeometry("cannot build in-plane axis".into()))?;
        let v_axis = n
            .cross(u_axis)
            .normalized()
            .ok_or_else(|| Error::DegenerateGeometry("cannot build in-plane axis".into()))?;
        Ok(Self { origin: plane.project_point(origin), u_axis, v_axis })
    }

    pub fn normal(&self) -> Vec3<T> {
        self.u_axis.cross(self.v_axis)
    }

    /// Inverse of [`project_to_plane_2d`] for on-plane points.
    pub fn lift(&self, p: Vec2<T>) -> Vec3<T> {
        self.origin + self.u_axis.scale(p.x) + self.v_axis.scale(p.y)
    }
}

pub fn project_to_plane_2d<T: Real>(point: Vec3<T>, basis: &PlaneBasis<T>) -> Vec2<T> {
    let d = point - basis.origin;
    Vec2::new(d.dot(basis.u_axis), d.dot(basis.v_axis))
}

/// Intersection of a ray with a plane; the hit must lie strictly in front of the origin.
pub fn ray_plane_intersect<T: Real>(ray: &Ray<T>, plane: &Plane<T>) -> Result<Vec3<T>> {
    let denom = plane.normal.dot(ray.direction);
    if denom.abs() < T::lit(1e-12) || denom == T::zero() {
        return Err(Error::ParallelRay);
    }
    let s = (plane.offset - plane.normal.dot(ray.origin)) / denom;
    if !(s > T::zero()) {
        return Err(Error::BehindCamera { s: s.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(ray.origin + ray.direction.scale(s))
}
