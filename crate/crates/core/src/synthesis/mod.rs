//! Backward synthesis: boundary partition, Hamiltonian machinery, the
//! closed-form characteristic families and the evader's bearing feedback.

mod adjoint;
mod boundary;
mod characteristic;
mod feedback;
mod gamma;

pub use adjoint::{adjoint_rate, hamiltonian, switch_sigma, AdjointState};
pub use boundary::{boundary_class, BoundaryClass};
pub use characteristic::{
    region_a_characteristic, region_b_characteristic, region_c_characteristic, CharPoint,
    Characteristic, Region,
};
pub use feedback::{evader_feedback, TurnSet};
pub use gamma::{
    crossing_time, crossing_time_with, gamma, gamma_critical, gamma_critical_vr, gamma_dtau,
    CriticalPoint, ScaledCoords,
};
