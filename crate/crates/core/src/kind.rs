//! Game of kind: who wins is decided by the speeds alone, and each outcome has
//! a constructive strategy.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    integrate, rk4_step, relative_dynamics, ControlSchedule, Controls, Direction, Event,
    GameParams, IntegrateOptions, RelState, TimedTrajectory,
};
use crate::scalar::Scalar;

/// Relative width of the band below `rho` in which the containment law re-latches.
pub const LATCH_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KindTag {
    EvaderEscapes,
    PursuerContains,
}

/// Serializes as `{"outcome": ..., "bound": number|null}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KindOutcome {
    #[serde(rename = "outcome")]
    pub tag: KindTag,
    /// Worst-case escape time `2 rho / (v_e - v_p)` when the evader escapes.
    pub bound: Option<f64>,
}

pub fn classify<T: Scalar>(params: &GameParams<T>) -> KindOutcome {
    match params.escape_bound() {
        Some(b) => KindOutcome { tag: KindTag::EvaderEscapes, bound: Some(b.to_f64_lossy()) },
        None => KindOutcome { tag: KindTag::PursuerContains, bound: None },
    }
}

/// Bearing latched by the containment law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContainmentMemory<T> {
    pub theta_bar: T,
}

impl<T: Scalar> ContainmentMemory<T> {
    /// Memory latched on the bearing of `s`.
    pub fn latched_at(s: &RelState<T>) -> Self {
        Self { theta_bar: s.to_polar().theta }
    }
}

/// Piecewise-constant containment law `u_p = pi + theta_bar`.
///
/// The latched bearing is refreshed whenever `|s| >= (1 - LATCH_EPS) rho`.
pub fn containment_feedback<T: Scalar>(
    params: &GameParams<T>,
    s: &RelState<T>,
    mem: ContainmentMemory<T>,
) -> Result<(T, ContainmentMemory<T>)> {
    if params.v_p() < params.v_e() {
        return Err(Error::WrongRegime("containment needs v_p >= v_e".into()));
    }
    let mem = if s.range() >= (T::one() - T::c(LATCH_EPS)) * params.rho() {
        ContainmentMemory::latched_at(s)
    } else {
        mem
    };
    Ok((T::PI() + mem.theta_bar, mem))
}

/// Evader turn-rate sequence held constant over consecutive periods.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaderSequence<T> {
    pub period: T,
    pub u_e: Vec<T>,
}

impl<T: Scalar> EvaderSequence<T> {
    fn at(&self, t: T) -> T {
        if self.u_e.is_empty() {
            return T::zero();
        }
        let k = (t / self.period).floor().to_usize().unwrap_or(0);
        self.u_e[k.min(self.u_e.len() - 1)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContainmentRun<T> {
    pub max_range: T,
    pub latches: usize,
    pub final_state: RelState<T>,
}

/// Plays the containment law against an open-loop evader over `horizon`.
///
/// Entry into the latch band is localized by bisection so the bearing is
/// latched on the band edge, not a step later.
pub fn simulate_containment<T: Scalar>(
    params: &GameParams<T>,
    s0: RelState<T>,
    evader: &EvaderSequence<T>,
    horizon: T,
    dt: T,
) -> Result<ContainmentRun<T>> {
    if !(dt > T::zero()) {
        return Err(Error::InvalidParams(format!("dt must be positive, got {dt}")));
    }
    let band = (T::one() - T::c(LATCH_EPS)) * params.rho();
    let mut mem = ContainmentMemory::latched_at(&s0);
    let mut latches = 0usize;
    let mut t = T::zero();
    let mut y = s0;
    let mut max_range = s0.range();
    let tol = T::c(1e-12) * horizon.max(T::one());

    let step = |y: &RelState<T>, u_e: T, u_p: T, h: T| {
        let c = Controls::new(u_e, u_p);
        let out = rk4_step(
            |_, v: &[T; 2]| {
                let f = relative_dynamics(params, &RelState::new(v[0], v[1]), &c);
                [f.x, f.y]
            },
            T::zero(),
            &[y.x, y.y],
            h,
        );
        RelState::new(out[0], out[1])
    };

    while horizon - t > tol {
        let (u_p, m) = containment_feedback(params, &y, mem)?;
        if m != mem {
            latches += 1;
        }
        mem = m;
        let u_e = evader.at(t + tol);
        let next_switch = ((t + tol) / evader.period).floor() * evader.period + evader.period;
        let h = dt.min(horizon - t).min(next_switch - t);
        let mut y1 = step(&y, u_e, u_p, h);
        let mut adv = h;
        if y.range() < band && y1.range() >= band {
            let (mut lo, mut hi) = (T::zero(), h);
            while hi - lo > tol {
                let mid = (lo + hi) * T::c(0.5);
                if step(&y, u_e, u_p, mid).range() >= band {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            adv = hi;
            y1 = step(&y, u_e, u_p, hi);
        }
        if !y1.is_finite() {
            return Err(Error::NonfiniteState { t: (t + adv).to_f64_lossy() });
        }
        t = t + adv;
        y = y1;
        max_range = max_range.max(y.range());
    }
    Ok(ContainmentRun { max_range, latches, final_state: y })
}

/// Outcome of the straight-line escape strategy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StraightEscape<T> {
    /// Simulated exit time.
    pub time: T,
    /// Exit time of the same race in closed form.
    pub closed_form: T,
    pub trajectory: TimedTrajectory<T>,
}

/// Evader keeps its heading (`u_e = 0`), pursuer answers with its worst case
/// for the evader, `u_p = 0`, so the relative state falls straight down at
/// `v_e - v_p`.
pub fn straight_line_escape<T: Scalar>(
    params: &GameParams<T>,
    s0: RelState<T>,
) -> Result<StraightEscape<T>> {
    let bound = params
        .escape_bound()
        .ok_or_else(|| Error::WrongRegime("straight-line escape needs v_p < v_e".into()))?;
    let rho = params.rho();
    if s0.range() > rho * (T::one() + T::c(1e-9)) {
        return Err(Error::OutsideGameSet);
    }
    let closed_form = (s0.y + (rho * rho - s0.x * s0.x).max(T::zero()).sqrt()) / params.closing_speed();
    let sch = ControlSchedule::constant(Controls::new(T::zero(), T::zero()));
    let opts = IntegrateOptions::new(params.default_dt(), bound * T::c(1.5))
        .with_event(Event::range_exit(rho));
    let trajectory = integrate(params, s0, &sch, Direction::Forward, &opts)?;
    if trajectory.terminated_by.is_none() {
        return Err(Error::HorizonExceeded { horizon: (bound * T::c(1.5)).to_f64_lossy() });
    }
    Ok(StraightEscape { time: trajectory.duration(), closed_form, trajectory })
}
