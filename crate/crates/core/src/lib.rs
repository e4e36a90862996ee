//! Solver for the prying pedestrian surveillance-evasion game: a turn-limited
//! evader tries to leave a disk of radius `rho` centred on an agile pursuer.
//!
//! The kinematics, transforms and closed-form characteristics are generic over
//! [`Scalar`] (`f32` or `f64`). The value solver, grid sweeps and the dynamic
//! programming oracle work in `f64`.

pub mod error;
pub mod kind;
pub mod model;
pub mod scalar;
pub mod solver;
pub mod synthesis;

pub use error::{Error, Result};
pub use scalar::{sign_of, wrap_angle, Scalar};

pub type Params = model::GameParams<f64>;
pub type State = model::RelState<f64>;
pub type Trajectory = model::TimedTrajectory<f64>;
pub type Params32 = model::GameParams<f32>;
pub type State32 = model::RelState<f32>;
