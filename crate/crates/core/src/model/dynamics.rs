use super::{Controls, GameParams, RelState};
use crate::scalar::Scalar;

/// Right-hand side of the relative kinematics
/// `(-w y u_e + v_p sin u_p, w x u_e - v_e + v_p cos u_p)`.
pub fn relative_dynamics<T: Scalar>(
    params: &GameParams<T>,
    s: &RelState<T>,
    c: &Controls<T>,
) -> RelState<T> {
    let w = params.omega_e();
    let vp = params.v_p();
    RelState {
        x: -w * s.y * c.u_e + vp * c.u_p.sin(),
        y: w * s.x * c.u_e - params.v_e() + vp * c.u_p.cos(),
    }
}

/// `f . xi`, half the rate of change of the squared range.
pub fn radial_rate<T: Scalar>(params: &GameParams<T>, s: &RelState<T>, c: &Controls<T>) -> T {
    relative_dynamics(params, s, c).dot(s)
}
