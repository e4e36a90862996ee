use serde::Serialize;

use crate::error::{Error, Result};
use crate::synthesis::Characteristic;
use crate::model::{
    integrate, relative_dynamics, ControlLaw, ControlSchedule, Direction, Event, GameParams,
    IntegrateOptions, RelState, TimedTrajectory,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PhaseRegion {
    A,
    B,
    C,
    Axis,
}

/// One segment of optimal play in forward time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Phase {
    pub region: PhaseRegion,
    pub duration: f64,
    pub law: ControlLaw<f64>,
}

/// Optimal play from one initial state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution {
    pub s0: RelState<f64>,
    pub t_star: f64,
    pub phases: Vec<Phase>,
    /// Forward trajectory sampled from the closed forms.
    pub trajectory: TimedTrajectory<f64>,
    pub terminal_state: RelState<f64>,
    /// `s0` lies on the upper axis above `y0#`, where both turns are optimal;
    /// the `u_e = -1` branch is returned.
    pub dispersal: bool,
    /// `s0` is the origin, valued by continuity with the axis race.
    pub origin_extension: bool,
    /// Closed-form description the phases were generated from.
    pub plan: Plan,
}

/// Closed form of an optimal play in forward time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Plan {
    /// Straight race down the axis from height `y0`.
    Axis { y0: f64 },
    /// Characteristic entered at natural parameter `s_star`, followed by the
    /// axis race when the arc ends on the axis. `mirrored` marks the `x < 0` image.
    Arc { ch: Characteristic<f64>, s_star: f64, mirrored: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseReport {
    pub region: PhaseRegion,
    pub duration: f64,
}

/// JSON shape of a solve: `{"T_star", "phases": [{"region", "duration"}], "dispersal"}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    #[serde(rename = "T_star")]
    pub t_star: f64,
    pub phases: Vec<PhaseReport>,
    pub dispersal: bool,
}

impl Solution {
    /// Closed-form state at forward time `t` in `[0, T*]`.
    pub fn state_at(&self, params: &GameParams<f64>, t: f64) -> RelState<f64> {
        let dv = params.closing_speed();
        match self.plan {
            Plan::Axis { y0 } => RelState::new(0.0, y0 - t * dv),
            Plan::Arc { ch, s_star, mirrored } => {
                let st = match ch.axis_height(params) {
                    Some(h) if t > s_star => RelState::new(0.0, h - (t - s_star) * dv),
                    _ => ch.at(params, (s_star - t).max(0.0)).state,
                };
                if mirrored {
                    st.mirrored()
                } else {
                    st
                }
            }
        }
    }

    pub fn report(&self) -> SolveReport {
        SolveReport {
            t_star: self.t_star,
            phases: self.phases.iter().map(|p| PhaseReport { region: p.region, duration: p.duration }).collect(),
            dispersal: self.dispersal,
        }
    }
}

/// Forward-time control schedule of a solution, phase by phase.
pub fn optimal_controls(sol: &Solution) -> ControlSchedule<f64> {
    let mut sch = ControlSchedule::new();
    for ph in &sol.phases {
        sch.push(ph.duration, ph.law);
    }
    sch
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayReport {
    /// `| |xi(T*)| - rho |` of the integrated state.
    pub terminal_range_error: f64,
    /// `f . xi` at the integrated terminal state.
    pub transversality: f64,
    /// Largest distance between integrated and closed-form samples.
    pub max_deviation: f64,
    /// First outward crossing of the circle by the integrated state.
    pub exit_time: Option<f64>,
    pub passed: bool,
    /// Integrated trajectory up to `T*`.
    pub trajectory: TimedTrajectory<f64>,
}

/// Replays [`optimal_controls`] through the integrator.
pub fn forward_verify(params: &GameParams<f64>, sol: &Solution) -> Result<ReplayReport> {
    forward_verify_with(params, sol, &optimal_controls(sol))
}

/// Replays an arbitrary schedule against the closed-form trajectory of `sol`.
///
/// Fails with `ReplayDiverged` when the deviation exceeds `1e-3 rho`.
pub fn forward_verify_with(
    params: &GameParams<f64>,
    sol: &Solution,
    schedule: &ControlSchedule<f64>,
) -> Result<ReplayReport> {
    let rho = params.rho();
    let dt = params.default_dt();
    let span = sol.t_star;
    let replay = integrate(params, sol.s0, schedule, Direction::Forward, &IntegrateOptions::new(dt, span))?;

    let mut max_dev: f64 = 0.0;
    for smp in &replay.samples {
        max_dev = max_dev.max((sol.state_at(params, smp.t) - smp.state).range());
    }
    let end = replay.final_state().ok_or(Error::EmptyTrajectory)?;
    max_dev = max_dev.max((end - sol.terminal_state).range());
    if max_dev > 1e-3 * rho {
        return Err(Error::ReplayDiverged { deviation: max_dev });
    }
    let c = schedule.eval(span);
    let transversality = relative_dynamics(params, &end, &c).dot(&end);

    let exit = if span > 0.0 {
        let opts = IntegrateOptions::new(dt, span * 1.01 + 10.0 * dt).with_event(Event::range_exit(rho));
        let tr = integrate(params, sol.s0, schedule, Direction::Forward, &opts)?;
        tr.terminated_by.map(|_| tr.duration())
    } else {
        Some(0.0)
    };
    let terminal_range_error = (end.range() - rho).abs();
    let passed = terminal_range_error < 1e-5 * rho && max_dev < 1e-5 * rho;
    Ok(ReplayReport {
        terminal_range_error,
        transversality,
        max_deviation: max_dev,
        exit_time: exit,
        passed,
        trajectory: replay,
    })
}
