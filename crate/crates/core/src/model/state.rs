use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use crate::scalar::{wrap_angle, Scalar};

/// Position of the pursuer relative to the evader, in the evader-fixed frame
/// (`y` along the evader heading, `x` to its right).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct RelState<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> RelState<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn range(&self) -> T {
        self.x.hypot(self.y)
    }

    pub fn dot(&self, o: &Self) -> T {
        self.x * o.x + self.y * o.y
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Reflection `x -> -x` across the evader heading axis.
    pub fn mirrored(&self) -> Self {
        Self { x: -self.x, y: self.y }
    }

    /// Point on the circle of radius `rho` at bearing `theta` (`x = rho sin`, `y = rho cos`).
    pub fn on_circle(rho: T, theta: T) -> Self {
        Self { x: rho * theta.sin(), y: rho * theta.cos() }
    }

    pub fn to_polar(&self) -> PolarState<T> {
        let r = self.range();
        let theta = if r == T::zero() { T::zero() } else { self.x.atan2(self.y) };
        PolarState { r, theta }
    }
}

impl<T: Scalar> Add for RelState<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { x: self.x + o.x, y: self.y + o.y }
    }
}

impl<T: Scalar> Sub for RelState<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { x: self.x - o.x, y: self.y - o.y }
    }
}

impl<T: Scalar> Mul<T> for RelState<T> {
    type Output = Self;
    fn mul(self, k: T) -> Self {
        Self { x: self.x * k, y: self.y * k }
    }
}

impl<T: Scalar> Neg for RelState<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { x: -self.x, y: -self.y }
    }
}

/// Range and bearing; the bearing is measured from the evader heading,
/// positive towards `+x`, in `(-pi, pi]`. The origin maps to `theta = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarState<T> {
    pub r: T,
    pub theta: T,
}

impl<T: Scalar> PolarState<T> {
    pub fn to_rel(&self) -> RelState<T> {
        RelState::on_circle(self.r, self.theta)
    }
}

/// Inertial positions of both players plus the evader heading.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct InertialState<T> {
    pub xe: T,
    pub ye: T,
    pub theta_e: T,
    pub xp: T,
    pub yp: T,
}

impl<T: Scalar> InertialState<T> {
    /// Euclidean separation of the two players.
    pub fn distance(&self) -> T {
        (self.xp - self.xe).hypot(self.yp - self.ye)
    }
}

/// Normalized evader turn rate `u_e` and pursuer heading relative to the
/// evader heading `u_p`. `u_p` is stored unwrapped.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Controls<T> {
    pub u_e: T,
    pub u_p: T,
}

impl<T: Scalar> Controls<T> {
    pub fn new(u_e: T, u_p: T) -> Self {
        Self { u_e, u_p }
    }

    /// `u_e` clamped to `[-1, 1]`.
    pub fn clamped(self) -> Self {
        Self { u_e: self.u_e.max(-T::one()).min(T::one()), u_p: self.u_p }
    }

    pub fn wrapped_u_p(&self) -> T {
        wrap_angle(self.u_p)
    }

    /// Controls that are optimal for the mirrored state.
    pub fn mirrored(&self) -> Self {
        Self { u_e: -self.u_e, u_p: -self.u_p }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn origin_polar_convention() {
        let p = RelState::new(0.0f64, 0.0).to_polar();
        assert_eq!(p.r, 0.0);
        assert_eq!(p.theta, 0.0);
    }

    #[test]
    fn bearing_convention() {
        let behind = RelState::new(0.0f64, -0.4).to_polar();
        assert_eq!(behind.theta, std::f64::consts::PI);
        let right = RelState::new(1.0f64, 0.0).to_polar();
        assert!((right.theta - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn polar_round_trip(x in -10.0f64..10.0, y in -10.0f64..10.0) {
            prop_assume!(x.hypot(y) > 1e-9);
            let s = RelState::new(x, y);
            let back = s.to_polar().to_rel();
            let scale = s.range();
            prop_assert!((back.x - x).abs() <= 1e-12 * scale.max(1.0));
            prop_assert!((back.y - y).abs() <= 1e-12 * scale.max(1.0));
        }
    }
}
