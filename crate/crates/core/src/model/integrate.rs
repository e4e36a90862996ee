use serde::Serialize;

use super::{relative_dynamics, ControlPolicy, Controls, GameParams, RelState};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    /// Physical time `t`.
    Forward,
    /// Backward time `tau = T - t`; the state obeys `d xi / d tau = -f`.
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EventKind {
    /// `|xi| = rho`.
    Range,
    /// `x = 0`.
    Axis,
    /// Caller-supplied predicate, tagged by the caller.
    Custom(u32),
}

/// Which sign changes of the event function count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EventCrossing {
    Rising,
    Falling,
    Either,
}

/// Zero crossing of a scalar function of `(time, state)`.
pub struct Event<'a, T> {
    pub kind: EventKind,
    pub crossing: EventCrossing,
    pub terminal: bool,
    func: Box<dyn Fn(T, &RelState<T>) -> T + Send + Sync + 'a>,
}

impl<'a, T: Scalar> Event<'a, T> {
    pub fn custom(
        tag: u32,
        crossing: EventCrossing,
        terminal: bool,
        func: impl Fn(T, &RelState<T>) -> T + Send + Sync + 'a,
    ) -> Self {
        Self { kind: EventKind::Custom(tag), crossing, terminal, func: Box::new(func) }
    }

    /// Terminal outward crossing of the surveillance circle.
    pub fn range_exit(rho: T) -> Self {
        Self {
            kind: EventKind::Range,
            crossing: EventCrossing::Rising,
            terminal: true,
            func: Box::new(move |_, s| s.dot(s) - rho * rho),
        }
    }

    /// Crossing of the evader heading axis.
    pub fn axis(terminal: bool) -> Self {
        Self {
            kind: EventKind::Axis,
            crossing: EventCrossing::Either,
            terminal,
            func: Box::new(|_, s| s.x),
        }
    }

    pub fn value(&self, t: T, s: &RelState<T>) -> T {
        (self.func)(t, s)
    }

    fn fires(&self, g0: T, g1: T) -> bool {
        let z = T::zero();
        match self.crossing {
            EventCrossing::Rising => g0 <= z && g1 > z,
            EventCrossing::Falling => g0 >= z && g1 < z,
            EventCrossing::Either => (g0 <= z && g1 > z) || (g0 >= z && g1 < z),
        }
    }
}

pub struct IntegrateOptions<'a, T> {
    pub dt: T,
    /// Length of the time interval to cover.
    pub span: T,
    pub events: Vec<Event<'a, T>>,
}

impl<'a, T: Scalar> IntegrateOptions<'a, T> {
    pub fn new(dt: T, span: T) -> Self {
        Self { dt, span, events: Vec::new() }
    }

    pub fn with_event(mut self, e: Event<'a, T>) -> Self {
        self.events.push(e);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySample<T> {
    pub t: T,
    pub state: RelState<T>,
    pub controls: Controls<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EventRecord<T> {
    pub kind: EventKind,
    pub t: T,
    pub state: RelState<T>,
}

/// Time-ordered samples; controls are the right-continuous values at each time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimedTrajectory<T> {
    pub samples: Vec<TrajectorySample<T>>,
    pub direction: Direction,
    pub events: Vec<EventRecord<T>>,
    pub terminated_by: Option<EventKind>,
}

impl<T: Scalar> TimedTrajectory<T> {
    pub fn new(direction: Direction) -> Self {
        Self { samples: Vec::new(), direction, events: Vec::new(), terminated_by: None }
    }

    pub fn duration(&self) -> T {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => T::zero(),
        }
    }

    pub fn first_state(&self) -> Option<RelState<T>> {
        self.samples.first().map(|s| s.state)
    }

    pub fn final_state(&self) -> Option<RelState<T>> {
        self.samples.last().map(|s| s.state)
    }

    pub fn max_range(&self) -> T {
        self.samples.iter().map(|s| s.state.range()).fold(T::zero(), T::max)
    }

    /// Times strictly increasing.
    pub fn is_time_ordered(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].t > w[0].t)
    }
}

/// One classical Runge-Kutta step of `y' = f(t, y)`.
pub fn rk4_step<T: Scalar, const N: usize>(
    f: impl Fn(T, &[T; N]) -> [T; N],
    t: T,
    y: &[T; N],
    h: T,
) -> [T; N] {
    let half = T::c(0.5);
    let axpy = |a: T, k: &[T; N]| -> [T; N] { std::array::from_fn(|i| y[i] + a * k[i]) };
    let k1 = f(t, y);
    let k2 = f(t + half * h, &axpy(half * h, &k1));
    let k3 = f(t + half * h, &axpy(half * h, &k2));
    let k4 = f(t + h, &axpy(h, &k3));
    let sixth = h / T::c(6.0);
    std::array::from_fn(|i| y[i] + sixth * (k1[i] + T::c(2.0) * (k2[i] + k3[i]) + k4[i]))
}

/// Fixed-step RK4 of the relative kinematics under `policy`.
///
/// Steps are shortened to land on policy breakpoints. Event zero crossings are
/// localized by bisection of the partial step to a time tolerance of `1e-10`;
/// integration stops at the first terminal event.
pub fn integrate<T: Scalar>(
    params: &GameParams<T>,
    s0: RelState<T>,
    policy: &dyn ControlPolicy<T>,
    direction: Direction,
    opts: &IntegrateOptions<'_, T>,
) -> Result<TimedTrajectory<T>> {
    if !(opts.dt > T::zero()) || !opts.dt.is_finite() {
        return Err(Error::InvalidParams(format!("dt must be positive, got {}", opts.dt)));
    }
    if !s0.is_finite() {
        return Err(Error::NonfiniteState { t: 0.0 });
    }
    let sgn = match direction {
        Direction::Forward => T::one(),
        Direction::Backward => -T::one(),
    };
    let step = |t: T, y: &RelState<T>, h: T| -> RelState<T> {
        let anchor = t + h * T::c(0.5);
        let rhs = |tt: T, v: &[T; 2]| -> [T; 2] {
            let s = RelState::new(v[0], v[1]);
            let c = policy.controls_at(tt, &s, anchor);
            let f = relative_dynamics(params, &s, &c);
            [sgn * f.x, sgn * f.y]
        };
        let out = rk4_step(rhs, t, &[y.x, y.y], h);
        RelState::new(out[0], out[1])
    };
    let time_tol = T::c(1e-10).max(T::epsilon() * T::c(8.0) * opts.span.abs().max(T::one()));
    let min_step = time_tol * T::c(0.5);

    let mut bps: Vec<T> = policy.breakpoints();
    bps.retain(|b| *b > T::zero() && *b < opts.span);
    bps.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    let mut next_bp = 0usize;

    let mut traj = TimedTrajectory::new(direction);
    let record = |t: T, s: RelState<T>, h: T| TrajectorySample {
        t,
        state: s,
        controls: policy.controls_at(t, &s, t + h * T::c(0.5)),
    };
    let mut t = T::zero();
    let mut y = s0;
    traj.samples.push(record(t, y, opts.dt));

    while opts.span - t > min_step {
        while next_bp < bps.len() && bps[next_bp] - t <= min_step {
            next_bp += 1;
        }
        let mut h = opts.dt.min(opts.span - t);
        if next_bp < bps.len() {
            h = h.min(bps[next_bp] - t);
        }
        let y1 = step(t, &y, h);
        if !y1.is_finite() {
            return Err(Error::NonfiniteState { t: (t + h).to_f64_lossy() });
        }

        // earliest firing event in this step
        let mut hit: Option<(usize, T, RelState<T>)> = None;
        for (k, ev) in opts.events.iter().enumerate() {
            let g0 = ev.value(t, &y);
            let g1 = ev.value(t + h, &y1);
            if !ev.fires(g0, g1) {
                continue;
            }
            let (mut lo, mut hi) = (T::zero(), h);
            let mut s_hi = y1;
            while hi - lo > time_tol {
                let mid = (lo + hi) * T::c(0.5);
                let s_mid = step(t, &y, mid);
                let gm = ev.value(t + mid, &s_mid);
                if ev.fires(g0, gm) {
                    hi = mid;
                    s_hi = s_mid;
                } else {
                    lo = mid;
                }
            }
            let g_hit = ev.value(t + hi, &s_hi);
            if g_hit.abs() > T::c(0.5) * g0.abs().max(g1.abs()) && hi > time_tol {
                return Err(Error::StepTooLarge { t: (t + hi).to_f64_lossy() });
            }
            if hit.map_or(true, |(_, th, _)| hi < th) {
                hit = Some((k, hi, s_hi));
            }
        }

        if let Some((k, th, sh)) = hit {
            let ev = &opts.events[k];
            traj.events.push(EventRecord { kind: ev.kind, t: t + th, state: sh });
            if ev.terminal {
                if th > min_step {
                    traj.samples.push(record(t + th, sh, h));
                } else if let Some(last) = traj.samples.last_mut() {
                    // event at the step start: keep a single sample at that time
                    last.state = sh;
                }
                traj.terminated_by = Some(ev.kind);
                return Ok(traj);
            }
        }

        t = t + h;
        y = y1;
        traj.samples.push(record(t, y, opts.dt));
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ControlLaw, ControlSchedule};

    fn fig8() -> GameParams<f64> {
        GameParams::new(2.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn straight_race_exits_at_half() {
        let p = fig8();
        let sch = ControlSchedule::constant(Controls::new(0.0, 0.0));
        let opts = IntegrateOptions::new(p.default_dt(), 5.0).with_event(Event::range_exit(p.rho()));
        let tr = integrate(&p, RelState::new(0.0, -0.5), &sch, Direction::Forward, &opts).unwrap();
        assert_eq!(tr.terminated_by, Some(EventKind::Range));
        let end = tr.samples.last().unwrap();
        assert!((end.t - 0.5).abs() < 1e-8, "exit at {}", end.t);
        assert!(tr.is_time_ordered());
    }

    #[test]
    fn rk4_error_shrinks_sixteenfold() {
        let p = GameParams::new(1.5, 1.0, 2.0, 1.0).unwrap();
        let sch = ControlSchedule::constant(Controls::new(1.0, 0.4));
        let s0 = RelState::new(0.3, -0.2);
        let run = |dt: f64| {
            let opts = IntegrateOptions::new(dt, 1.0);
            integrate(&p, s0, &sch, Direction::Forward, &opts).unwrap().final_state().unwrap()
        };
        let reference = run(1e-4);
        let e1 = (run(0.1) - reference).range();
        let e2 = (run(0.05) - reference).range();
        let ratio = e1 / e2;
        assert!(ratio > 13.0 && ratio < 19.0, "ratio {ratio}");
    }

    #[test]
    fn silent_event_returns_full_span() {
        let p = fig8();
        let sch = ControlSchedule::constant(Controls::new(1.0, 0.0));
        let opts = IntegrateOptions::new(0.01, 0.3).with_event(Event::custom(
            7,
            EventCrossing::Either,
            true,
            |_, _| 1.0,
        ));
        let tr = integrate(&p, RelState::new(0.1, 0.1), &sch, Direction::Forward, &opts).unwrap();
        assert_eq!(tr.terminated_by, None);
        assert!((tr.duration() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn backward_then_forward_returns_home() {
        let p = GameParams::new(1.5, 1.0, 1.0, 1.0).unwrap();
        let mut sch = ControlSchedule::new();
        sch.push(1.3, ControlLaw::LinearHeading { u_e: -1.0, u_p0: 0.2, rate: 1.0 });
        sch.push(2.0, ControlLaw::Constant { u_e: 0.0, u_p: 0.0 });
        sch.push(3.0, ControlLaw::Constant { u_e: 1.0, u_p: -2.0 });
        let span = 2.0 * std::f64::consts::PI;
        let s0 = RelState::new(0.2, -0.4);
        let opts = IntegrateOptions::new(p.default_dt(), span);
        let back = integrate(&p, s0, &sch, Direction::Backward, &opts).unwrap();
        let rev = sch.time_reversed(span);
        let fwd =
            integrate(&p, back.final_state().unwrap(), &rev, Direction::Forward, &opts).unwrap();
        assert!((fwd.final_state().unwrap() - s0).range() < 1e-8);
    }

    #[test]
    fn steps_land_on_breakpoints() {
        let p = fig8();
        let mut sch = ControlSchedule::new();
        sch.push(0.123, ControlLaw::Constant { u_e: 1.0, u_p: 0.0 });
        sch.push(1.0, ControlLaw::Constant { u_e: -1.0, u_p: 0.0 });
        let opts = IntegrateOptions::new(0.05, 0.5);
        let tr = integrate(&p, RelState::new(0.0, 0.0), &sch, Direction::Forward, &opts).unwrap();
        assert!(tr.samples.iter().any(|s| (s.t - 0.123).abs() < 1e-15));
    }

    #[test]
    fn nonpositive_dt_rejected() {
        let p = fig8();
        let sch = ControlSchedule::constant(Controls::new(0.0, 0.0));
        let opts = IntegrateOptions::new(0.0, 1.0);
        assert!(integrate(&p, RelState::new(0.0, 0.0), &sch, Direction::Forward, &opts).is_err());
    }

    #[test]
    fn discontinuous_event_is_reported() {
        let p = fig8();
        let sch = ControlSchedule::constant(Controls::new(0.0, 0.0));
        let opts = IntegrateOptions::new(0.1, 1.0).with_event(Event::custom(
            1,
            EventCrossing::Rising,
            true,
            |t, _| if t < 0.25 { -1.0 } else { 1.0 },
        ));
        let r = integrate(&p, RelState::new(0.0, 0.0), &sch, Direction::Forward, &opts);
        assert!(matches!(r, Err(Error::StepTooLarge { .. })));
    }
}
