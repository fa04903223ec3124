use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{Rigid2D, Vec2};

/// Least-squares proper rigid transform (no scale, no reflection) with
/// `dst_i ≈ R src_i + t`.
///
/// In 2D the optimal rotation of the centered cross-covariance has the closed
/// form `atan2(Σ a×b, Σ a·b)`, which is always a proper rotation.
pub fn rigid_fit_2d<T: Real>(src: &[Vec2<T>], dst: &[Vec2<T>]) -> Result<Rigid2D<T>> {
    if src.len() != dst.len() {
        return Err(Error::DegenerateFit(format!(
            "point lists differ in length ({} vs {})",
            src.len(),
            dst.len()
        )));
    }
    if src.len() < 2 {
        return Err(Error::DegenerateFit(format!("need at least 2 pairs, got {}", src.len())));
    }
    if src.iter().chain(dst).any(|p| !p.is_finite()) {
        return Err(Error::DegenerateFit("non-finite coordinate".into()));
    }
    let cs = Vec2::mean(src).expect("non-empty");
    let cd = Vec2::mean(dst).expect("non-empty");
    let (mut dot, mut cross, mut spread) = (T::zero(), T::zero(), T::zero());
    for (s, d) in src.iter().zip(dst) {
        let a = *s - cs;
        let b = *d - cd;
        dot = dot + a.dot(b);
        cross = cross + a.perp_dot(b);
        spread = spread + a.norm_squared();
    }
    let scale = src.iter().fold(T::zero(), |m, p| m.max(p.x.abs()).max(p.y.abs()));
    if spread <= (scale * T::epsilon()).powi(2) * T::from_count(src.len()) {
        return Err(Error::DegenerateFit("all source points coincide".into()));
    }
    let theta = cross.atan2(dot);
    let rot = Rigid2D::rotation(theta);
    Ok(Rigid2D::new(theta, cd - rot.rotate(cs)))
}

/// Sum of squared residuals of `transform` over the correspondences.
pub fn rigid_residual<T: Real>(transform: &Rigid2D<T>, src: &[Vec2<T>], dst: &[Vec2<T>]) -> T {
    src.iter()
        .zip(dst)
        .fold(T::zero(), |acc, (s, d)| acc + (transform.apply(*s) - *d).norm_squared())
}
