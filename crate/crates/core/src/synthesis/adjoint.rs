use std::ops::{Add, Mul, Sub};

use serde::Serialize;

use crate::model::{relative_dynamics, Controls, Direction, GameParams, RelState};
use crate::scalar::Scalar;

/// Costate `p = (p_x, p_y)`, the value gradient along a characteristic.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct AdjointState<T> {
    pub p_x: T,
    pub p_y: T,
}

impl<T: Scalar> AdjointState<T> {
    pub fn new(p_x: T, p_y: T) -> Self {
        Self { p_x, p_y }
    }

    pub fn norm(&self) -> T {
        self.p_x.hypot(self.p_y)
    }
}

impl<T: Scalar> Add for AdjointState<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.p_x + o.p_x, self.p_y + o.p_y)
    }
}

impl<T: Scalar> Sub for AdjointState<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.p_x - o.p_x, self.p_y - o.p_y)
    }
}

impl<T: Scalar> Mul<T> for AdjointState<T> {
    type Output = Self;
    fn mul(self, k: T) -> Self {
        Self::new(self.p_x * k, self.p_y * k)
    }
}

/// `H = p . f(s, c) + 1`, with unit running cost.
pub fn hamiltonian<T: Scalar>(
    params: &GameParams<T>,
    s: &RelState<T>,
    p: &AdjointState<T>,
    c: &Controls<T>,
) -> T {
    let f = relative_dynamics(params, s, c);
    p.p_x * f.x + p.p_y * f.y + T::one()
}

/// Costate rate: `omega u_e (-p_y, p_x)` forward, negated in backward time.
pub fn adjoint_rate<T: Scalar>(
    params: &GameParams<T>,
    p: &AdjointState<T>,
    ue_sign: T,
    direction: Direction,
) -> AdjointState<T> {
    let k = params.omega_e() * ue_sign;
    let fwd = AdjointState::new(-k * p.p_y, k * p.p_x);
    match direction {
        Direction::Forward => fwd,
        Direction::Backward => fwd * -T::one(),
    }
}

/// Switching function `p_x y - p_y x`; the evader's bang control is its sign.
pub fn switch_sigma<T: Scalar>(s: &RelState<T>, p: &AdjointState<T>) -> T {
    p.p_x * s.y - p.p_y * s.x
}
