//! Game-of-degree value and Nash controls at arbitrary states, value grids,
//! the pure-pursuit baseline and a grid dynamic-programming oracle.

mod dp;
mod grid;
mod invert;
mod pursuit;
mod solution;

pub use dp::{dp_oracle, DpOptions};
pub use grid::{pure_pursuit_grid, value_grid, CellFailure, CellRegion, ValueGrid};
pub use invert::{solve, Located, Solver, Hint};
pub use pursuit::{pure_pursuit_time, PurePursuit};
pub use solution::{
    forward_verify, forward_verify_with, optimal_controls, Phase, PhaseRegion, PhaseReport, Plan,
    ReplayReport, SolveReport, Solution,
};
