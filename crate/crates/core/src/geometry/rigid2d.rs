use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::{wrap_angle, Real};

use super::Vec2;

/// A 2D rotation by `theta` radians followed by a translation `t`, acting on
/// column vectors: `x -> R(theta) x + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rigid2D<T> {
    pub theta: T,
    pub t: Vec2<T>,
}

impl<T: Real> Rigid2D<T> {
    pub fn new(theta: T, t: Vec2<T>) -> Self {
        Self { theta, t }
    }

    pub fn identity() -> Self {
        Self::new(T::zero(), Vec2::zero())
    }

    pub fn rotation(theta: T) -> Self {
        Self::new(theta, Vec2::zero())
    }

    pub fn translation(t: Vec2<T>) -> Self {
        Self::new(T::zero(), t)
    }

    /// Row-major rotation matrix.
    pub fn matrix(&self) -> [[T; 2]; 2] {
        let (s, c) = self.theta.sin_cos();
        [[c, -s], [s, c]]
    }

    pub fn rotate(&self, p: Vec2<T>) -> Vec2<T> {
        let (s, c) = self.theta.sin_cos();
        Vec2::new(c * p.x - s * p.y, s * p.x + c * p.y)
    }

    pub fn apply(&self, p: Vec2<T>) -> Vec2<T> {
        self.rotate(p) + self.t
    }

    pub fn inverse(&self) -> Self {
        let inv = Self::rotation(-self.theta);
        Self::new(-self.theta, -inv.rotate(self.t))
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &Self) -> Self {
        Self::new(
            wrap_angle(self.theta + other.theta),
            self.rotate(other.t) + self.t,
        )
    }

    pub fn is_finite(&self) -> bool {
        self.theta.is_finite() && self.t.is_finite()
    }

    /// Largest of the wrapped angle difference and the translation difference.
    pub fn max_abs_diff(&self, o: &Self) -> T {
        let dt = wrap_angle(self.theta - o.theta).abs();
        dt.max((self.t.x - o.t.x).abs()).max((self.t.y - o.t.y).abs())
    }
}

impl<T: Real> Default for Rigid2D<T> {
    fn default() -> Self {
        Self::identity()
    }
}

/// Free-function form of [`Rigid2D::compose`].
pub fn compose_rigid2d<T: Real>(a: &Rigid2D<T>, b: &Rigid2D<T>) -> Rigid2D<T> {
    a.compose(b)
}


/// `T_{f,0} = T_{1,0} ∘ T_{2,1} ∘ … ∘ T_{f,f-1}`, where `chain[j]` maps frame-`j`
/// coordinates into frame `j-1`. Frame 0 maps through the identity.
pub fn chain_to_frame0<T: Real>(chain: &BTreeMap<u32, Rigid2D<T>>, f: u32) -> Result<Rigid2D<T>> {
    let mut acc = Rigid2D::identity();
    for j in 1..=f {
        let step = chain.get(&j).ok_or(Error::Gap { frame: j })?;
        acc = acc.compose(step);
    }
    Ok(acc)
}

/// Incremental form of [`chain_to_frame0`]: yields `(f, T_{f,0})` for
/// `f = 0, 1, 2, …` and stops before the first missing link.
pub struct CumulativeChain<'a, T> {
    chain: &'a BTreeMap<u32, Rigid2D<T>>,
    next: u32,
    acc: Rigid2D<T>,
    done: bool,
}

impl<'a, T: Real> CumulativeChain<'a, T> {
    pub fn new(chain: &'a BTreeMap<u32, Rigid2D<T>>) -> Self {
        Self { chain, next: 0, acc: Rigid2D::identity(), done: false }
    }
}

impl<T: Real> Iterator for CumulativeChain<'_, T> {
    type Item = (u32, Rigid2D<T>);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let f = self.next;
        if f > 0 {
            match self.chain.get(&f) {
                Some(step) => self.acc = self.acc.compose(step),
                None => {
                    self.done = true;
                    return None;
                }
            }
        }
        self.next = f.checked_add(1).unwrap_or_else(|| {
            self.done = true;
            f
        });
        Some((f, self.acc))
    }
}
