use serde::Serialize;

use super::{rk4_step, ControlPolicy, Direction, GameParams, InertialState, RelState, TimedTrajectory};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Evader-centred coordinates of the pursuer: `xi = R(theta_e) (xi_p - xi_e)`
/// with `R = [[cos, -sin], [sin, cos]]`.
pub fn to_relative<T: Scalar>(s: &InertialState<T>) -> RelState<T> {
    let (sn, cs) = s.theta_e.sin_cos();
    let dx = s.xp - s.xe;
    let dy = s.yp - s.ye;
    RelState::new(cs * dx - sn * dy, sn * dx + cs * dy)
}

/// Inverse of [`to_relative`] for a given evader pose.
fn pursuer_position<T: Scalar>(pose: &EvaderPose<T>, rel: &RelState<T>) -> (T, T) {
    let (sn, cs) = pose.theta_e.sin_cos();
    (pose.xe + cs * rel.x + sn * rel.y, pose.ye - sn * rel.x + cs * rel.y)
}

/// Inertial position and heading of the evader. Heading is measured from the
/// inertial `y` axis towards `x`, so the velocity is `v_e (sin, cos)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct EvaderPose<T> {
    pub xe: T,
    pub ye: T,
    pub theta_e: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InertialSample<T> {
    pub t: T,
    pub state: InertialState<T>,
    /// Pursuer inertial heading `theta_e + u_p` (unwrapped).
    pub theta_p: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InertialPath<T> {
    pub samples: Vec<InertialSample<T>>,
}

impl<T: Scalar> InertialPath<T> {
    /// Population variance of the pursuer heading over the samples.
    pub fn pursuer_heading_variance(&self) -> T {
        let n = T::from_usize(self.samples.len()).unwrap_or(T::one());
        let mean = self.samples.iter().fold(T::zero(), |a, s| a + s.theta_p) / n;
        self.samples
            .iter()
            .fold(T::zero(), |a, s| a + (s.theta_p - mean) * (s.theta_p - mean))
            / n
    }
}

/// Replays a forward relative trajectory in the inertial frame.
///
/// The evader unicycle and the agile pursuer with heading `theta_e + u_p` are
/// integrated with RK4 on the time grid of `rel_traj`, using `controls` for the
/// inputs. The pursuer start follows from `evader_start` and the first relative
/// sample.
pub fn to_inertial<T: Scalar>(
    params: &GameParams<T>,
    rel_traj: &TimedTrajectory<T>,
    controls: &dyn ControlPolicy<T>,
    evader_start: EvaderPose<T>,
) -> Result<InertialPath<T>> {
    let first = rel_traj.samples.first().ok_or(Error::EmptyTrajectory)?;
    if rel_traj.samples.len() < 2 {
        return Err(Error::EmptyTrajectory);
    }
    if rel_traj.direction != Direction::Forward {
        return Err(Error::WrongRegime("inertial replay needs a forward trajectory".into()));
    }
    let (xp, yp) = pursuer_position(&evader_start, &first.state);
    let mut y = [evader_start.xe, evader_start.ye, evader_start.theta_e, xp, yp];
    let (ve, vp, w) = (params.v_e(), params.v_p(), params.omega_e());

    let sample = |t: T, y: &[T; 5], anchor: T| {
        let rel = to_relative(&InertialState { xe: y[0], ye: y[1], theta_e: y[2], xp: y[3], yp: y[4] });
        let c = controls.controls_at(t, &rel, anchor);
        InertialSample {
            t,
            state: InertialState { xe: y[0], ye: y[1], theta_e: y[2], xp: y[3], yp: y[4] },
            theta_p: y[2] + c.u_p,
        }
    };

    let mut out = InertialPath { samples: Vec::with_capacity(rel_traj.samples.len()) };
    let first_h = rel_traj.samples[1].t - first.t;
    out.samples.push(sample(first.t, &y, first.t + first_h * T::c(0.5)));
    for win in rel_traj.samples.windows(2) {
        let (t0, t1) = (win[0].t, win[1].t);
        let h = t1 - t0;
        let anchor = t0 + h * T::c(0.5);
        let rhs = |t: T, v: &[T; 5]| -> [T; 5] {
            let st = InertialState { xe: v[0], ye: v[1], theta_e: v[2], xp: v[3], yp: v[4] };
            let c = controls.controls_at(t, &to_relative(&st), anchor);
            let hp = v[2] + c.u_p;
            [ve * v[2].sin(), ve * v[2].cos(), w * c.u_e, vp * hp.sin(), vp * hp.cos()]
        };
        y = rk4_step(rhs, t0, &y, h);
        out.samples.push(sample(t1, &y, anchor));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{integrate, ControlLaw, ControlSchedule, Controls, IntegrateOptions};
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn identity_and_quarter_turn() {
        let a = to_relative(&InertialState { xe: 0.0, ye: 0.0, theta_e: 0.0, xp: 1.0, yp: 2.0 });
        assert_eq!((a.x, a.y), (1.0, 2.0));
        let b = to_relative(&InertialState { xe: 0.0, ye: 0.0, theta_e: FRAC_PI_2, xp: 1.0, yp: 0.0 });
        assert!(b.x.abs() < 1e-15 && (b.y - 1.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn rotation_is_isometric(xe in -5.0f64..5.0, ye in -5.0f64..5.0, th in -10.0f64..10.0,
                                 xp in -5.0f64..5.0, yp in -5.0f64..5.0) {
            let s = InertialState { xe, ye, theta_e: th, xp, yp };
            let d = s.distance();
            prop_assert!((to_relative(&s).range() - d).abs() <= 1e-12 * d.max(1.0));
        }
    }

    #[test]
    fn empty_trajectory_rejected() {
        let p = GameParams::new(2.0, 1.0, 1.0, 1.0).unwrap();
        let tr = TimedTrajectory::new(Direction::Forward);
        let sch = ControlSchedule::<f64>::new();
        assert_eq!(to_inertial(&p, &tr, &sch, EvaderPose::default()), Err(Error::EmptyTrajectory));
    }

    #[test]
    fn straight_arc_gives_parallel_lines() {
        let p = GameParams::new(2.0, 1.0, 1.0, 1.0).unwrap();
        let sch = ControlSchedule::constant(Controls::new(0.0, 0.0));
        let tr = integrate(&p, RelState::new(0.2, 0.3), &sch, Direction::Forward, &IntegrateOptions::new(0.01, 1.0)).unwrap();
        let path = to_inertial(&p, &tr, &sch, EvaderPose { xe: 1.0, ye: -1.0, theta_e: 0.3 }).unwrap();
        let last = path.samples.last().unwrap().state;
        let (s, c) = 0.3f64.sin_cos();
        assert!((last.xe - (1.0 + 2.0 * s)).abs() < 1e-12);
        assert!((last.ye - (-1.0 + 2.0 * c)).abs() < 1e-12);
        assert!(path.pursuer_heading_variance() < 1e-20);
    }

    #[test]
    fn relative_reconstruction_matches() {
        let p = GameParams::new(1.5, 1.0, 1.0, 1.0).unwrap();
        let mut sch = ControlSchedule::new();
        sch.push(0.7, ControlLaw::LinearHeading { u_e: -1.0, u_p0: 1.0, rate: 1.0 });
        sch.push(0.8, ControlLaw::Constant { u_e: 1.0, u_p: -0.5 });
        let tr = integrate(&p, RelState::new(0.3, 0.1), &sch, Direction::Forward, &IntegrateOptions::new(p.default_dt(), 1.5)).unwrap();
        let path = to_inertial(&p, &tr, &sch, EvaderPose { xe: 0.0, ye: 0.0, theta_e: 1.0 }).unwrap();
        for (a, b) in tr.samples.iter().zip(&path.samples) {
            assert!((to_relative(&b.state) - a.state).range() < 1e-10);
        }
    }

    #[test]
    fn finite_difference_of_transform_matches_dynamics() {
        // d/dt of to_relative along the inertial flow equals relative_dynamics
        use crate::model::relative_dynamics;
        let p = GameParams::new(1.7, 0.8, 1.3, 1.0).unwrap();
        let mut seed = 12345u64;
        let mut rnd = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        for _ in 0..200 {
            let st = InertialState { xe: rnd(), ye: rnd(), theta_e: 3.0 * rnd(), xp: rnd(), yp: rnd() };
            let c = Controls::new(rnd(), 3.0 * rnd());
            let flow = |s: &InertialState<f64>, h: f64| {
                let hp = s.theta_e + c.u_p;
                InertialState {
                    xe: s.xe + h * p.v_e() * s.theta_e.sin(),
                    ye: s.ye + h * p.v_e() * s.theta_e.cos(),
                    theta_e: s.theta_e + h * p.omega_e() * c.u_e,
                    xp: s.xp + h * p.v_p() * hp.sin(),
                    yp: s.yp + h * p.v_p() * hp.cos(),
                }
            };
            let h = 1e-5;
            let fd = (to_relative(&flow(&st, h)) - to_relative(&flow(&st, -h))) * (0.5 / h);
            let f = relative_dynamics(&p, &to_relative(&st), &c);
            assert!((fd - f).range() < 1e-8, "{fd:?} vs {f:?}");
        }
    }
}
