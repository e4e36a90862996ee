use serde::Serialize;

use super::{boundary_class, crossing_time_with, AdjointState, BoundaryClass, CriticalPoint};
use crate::error::{Error, Result};
use crate::model::{Controls, GameParams, RelState};
use crate::scalar::{sign_of, wrap_angle, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Region {
    /// Arcs ending directly on the usable part away from the axis.
    A,
    /// Arcs joining the lower axis, then racing straight down.
    B,
    /// Arcs joining the upper axis after the re-crossing.
    C,
}

/// State, costate and Nash controls at one backward time of a characteristic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharPoint<T> {
    pub state: RelState<T>,
    pub adjoint: AdjointState<T>,
    pub controls: Controls<T>,
}

impl<T: Scalar> CharPoint<T> {
    /// Reflection in the `y` axis: state `x -> -x`, both controls negated.
    pub fn mirrored(&self) -> Self {
        Self {
            state: self.state.mirrored(),
            adjoint: AdjointState::new(-self.adjoint.p_x, self.adjoint.p_y),
            controls: self.controls.mirrored(),
        }
    }
}

fn check_tau<T: Scalar>(tau: T) -> Result<()> {
    if tau < T::zero() || !tau.is_finite() {
        return Err(Error::NegativeTau(tau.to_f64_lossy()));
    }
    Ok(())
}

/// Arc ending on the usable part at bearing `theta0`, evaluated at backward time `tau`.
pub fn region_a_characteristic<T: Scalar>(
    params: &GameParams<T>,
    theta0: T,
    tau: T,
) -> Result<CharPoint<T>> {
    check_tau(tau)?;
    let theta0 = wrap_angle(theta0);
    let start = RelState::on_circle(params.rho(), theta0);
    if theta0 == T::PI() || theta0.sin() == T::zero() {
        return Err(Error::NotUsable { theta0: theta0.to_f64_lossy() });
    }
    if boundary_class(params, &start)? != BoundaryClass::Up {
        return Err(Error::NotUsable { theta0: theta0.to_f64_lossy() });
    }
    Ok(region_a_unchecked(params, theta0, tau))
}

pub(crate) fn region_a_unchecked<T: Scalar>(params: &GameParams<T>, theta0: T, tau: T) -> CharPoint<T> {
    let (ve, vp, w, rho) = (params.v_e(), params.v_p(), params.omega_e(), params.rho());
    let s = sign_of(theta0.sin());
    let e = -s;
    let wt = w * tau;
    let phi = theta0 - s * wt;
    let (sp, cp) = phi.sin_cos();
    let (sw, cw) = wt.sin_cos();
    let reach = rho + tau * vp;
    let state = RelState::new(
        (s * ve * (cw - T::one())) / w + reach * sp,
        ve * sw / w + reach * cp,
    );
    let d = -vp - ve * theta0.cos();
    let adjoint = AdjointState::new(-sp / d, -cp / d);
    CharPoint { state, adjoint, controls: Controls::new(e, T::PI() + phi) }
}

/// Arc joining the axis at `(0, y0)` with evader turn `ue_sign`, at backward time `tau`.
pub fn region_b_characteristic<T: Scalar>(
    params: &GameParams<T>,
    y0: T,
    ue_sign: T,
    tau: T,
) -> Result<CharPoint<T>> {
    check_tau(tau)?;
    if y0 < -params.rho() {
        return Err(Error::OutOfRange(format!("axis height {y0} below -rho")));
    }
    check_sign(ue_sign)?;
    Ok(region_b_unchecked(params, y0, ue_sign, tau))
}

fn check_sign<T: Scalar>(e: T) -> Result<()> {
    if e != T::one() && e != -T::one() {
        return Err(Error::InvalidParams(format!("ue_sign must be +1 or -1, got {e}")));
    }
    Ok(())
}

pub(crate) fn region_b_unchecked<T: Scalar>(params: &GameParams<T>, y0: T, e: T, tau: T) -> CharPoint<T> {
    let (ve, vp, w) = (params.v_e(), params.v_p(), params.omega_e());
    let wt = w * tau;
    let (sw, cw) = wt.sin_cos();
    let r = ve / w;
    let state = RelState::new(
        e * ((y0 - tau * vp) * sw + r * (T::one() - cw)),
        (y0 - tau * vp) * cw + r * sw,
    );
    let k = T::one() / params.closing_speed();
    let adjoint = AdjointState::new(k * e * sw, k * cw);
    CharPoint { state, adjoint, controls: Controls::new(e, e * wt) }
}

/// Arc started on the upper axis at `(0, y0)` with `0 < y0 < y0#`, taken from
/// its return to the axis onwards; `sigma` is backward time since that return.
pub fn region_c_characteristic<T: Scalar>(
    params: &GameParams<T>,
    y0: T,
    ue_sign: T,
    sigma: T,
) -> Result<CharPoint<T>> {
    check_tau(sigma)?;
    check_sign(ue_sign)?;
    let crit = super::gamma_critical(params)?
        .ok_or_else(|| Error::WrongRegime("region C needs v_r > 1/2".into()))?;
    let tau_x = crossing_time_with(params.speed_ratio(), &crit, y0 * params.omega_e() / params.v_e())?
        / params.omega_e();
    Ok(region_b_unchecked(params, y0, ue_sign, tau_x + sigma))
}

/// One closed-form characteristic together with its validity interval.
///
/// The natural parameter is backward time `tau` for regions A and B and the
/// shifted time `sigma = tau - tau_x` for region C.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Characteristic<T> {
    pub region: Region,
    /// `theta0` for region A, the axis height `y0` for regions B and C.
    pub terminal_param: T,
    pub ue_sign: T,
    /// Backward-time interval `[start, end]` on which the arc is optimal.
    pub validity: (T, T),
    /// Axis return time `tau_x` (zero outside region C).
    pub tau_cross: T,
}

impl<T: Scalar> Characteristic<T> {
    pub fn region_a(params: &GameParams<T>, theta0: T) -> Result<Self> {
        region_a_characteristic(params, theta0, T::zero())?;
        let theta0 = wrap_angle(theta0);
        let e = -sign_of(theta0.sin());
        let end = validity_end(params, e, T::zero(), |t| region_a_unchecked(params, theta0, t).state);
        Ok(Self { region: Region::A, terminal_param: theta0, ue_sign: e, validity: (T::zero(), end), tau_cross: T::zero() })
    }

    pub fn region_b(params: &GameParams<T>, y0: T, ue_sign: T) -> Result<Self> {
        region_b_characteristic(params, y0, ue_sign, T::zero())?;
        let end = validity_end(params, ue_sign, T::zero(), |t| region_b_unchecked(params, y0, ue_sign, t).state);
        Ok(Self { region: Region::B, terminal_param: y0, ue_sign, validity: (T::zero(), end), tau_cross: T::zero() })
    }

    pub fn region_c(params: &GameParams<T>, crit: &CriticalPoint<T>, y0: T, ue_sign: T) -> Result<Self> {
        check_sign(ue_sign)?;
        let tau_x = crossing_time_with(params.speed_ratio(), crit, y0 * params.omega_e() / params.v_e())?
            / params.omega_e();
        let end = validity_end(params, ue_sign, tau_x, |t| region_b_unchecked(params, y0, ue_sign, t).state);
        Ok(Self { region: Region::C, terminal_param: y0, ue_sign, validity: (tau_x, end), tau_cross: tau_x })
    }

    /// Length of the validity interval in the natural parameter.
    pub fn span(&self) -> T {
        self.validity.1 - self.validity.0
    }

    /// Point at natural parameter `s` (`tau` for A/B, `sigma` for C).
    pub fn at(&self, params: &GameParams<T>, s: T) -> CharPoint<T> {
        match self.region {
            Region::A => region_a_unchecked(params, self.terminal_param, s),
            Region::B => region_b_unchecked(params, self.terminal_param, self.ue_sign, s),
            Region::C => region_b_unchecked(params, self.terminal_param, self.ue_sign, self.tau_cross + s),
        }
    }

    /// Height where the arc meets the axis: `y0` for B, the return height for C.
    pub fn axis_height(&self, params: &GameParams<T>) -> Option<T> {
        match self.region {
            Region::A => None,
            Region::B => Some(self.terminal_param),
            Region::C => Some(self.at(params, T::zero()).state.y),
        }
    }

    /// Escape time under optimal play from the point at natural parameter `s`.
    pub fn value_at(&self, params: &GameParams<T>, s: T) -> T {
        match self.axis_height(params) {
            None => s,
            Some(h) => s + (params.rho() + h) / params.closing_speed(),
        }
    }
}

/// First backward time after `start` at which the arc breaks the sign condition
/// `ue_sign in sign(-x)` or leaves the disk, capped at twice the escape bound.
pub(crate) fn validity_end<T: Scalar>(
    params: &GameParams<T>,
    ue_sign: T,
    start: T,
    state: impl Fn(T) -> RelState<T>,
) -> T {
    let rho = params.rho();
    let cap = start + T::c(2.0) * params.escape_bound().unwrap_or(T::c(4.0) * rho / params.v_e());
    let breached = |t: T| {
        let s = state(t);
        -ue_sign * s.x < T::zero() || s.range() > rho * (T::one() + T::c(1e-12))
    };
    let h = T::c(0.01) * (T::one() / params.omega_e()).min(rho / params.v_e());
    let mut t0 = start;
    loop {
        let t1 = (t0 + h).min(cap);
        if breached(t1) {
            let (mut lo, mut hi) = (t0, t1);
            let tol = T::c(1e-12) * cap.max(T::one());
            while hi - lo > tol {
                let mid = (lo + hi) * T::c(0.5);
                if breached(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return lo;
        }
        if t1 >= cap {
            return cap;
        }
        t0 = t1;
    }
}
