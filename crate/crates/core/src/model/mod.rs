//! Kinematics of the game in the evader-fixed frame, coordinate transforms and
//! a fixed-step integrator with event localization.

mod dynamics;
mod inertial;
mod integrate;
mod io;
mod params;
mod schedule;
mod state;

pub use dynamics::{radial_rate, relative_dynamics};
pub use inertial::{to_inertial, to_relative, EvaderPose, InertialPath, InertialSample};
pub use integrate::{
    integrate, rk4_step, Direction, Event, EventCrossing, EventKind, EventRecord,
    IntegrateOptions, TimedTrajectory, TrajectorySample,
};
pub use io::{read_relative_csv, write_inertial_csv, write_relative_csv};
pub use params::GameParams;
pub use schedule::{ControlLaw, ControlPiece, ControlPolicy, ControlSchedule, FeedbackPolicy};
pub use state::{Controls, InertialState, PolarState, RelState};
