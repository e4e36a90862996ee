use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{GameParams, RelState};
use crate::scalar::Scalar;

/// Partition of the surveillance circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundaryClass {
    /// Usable part: the evader can force an outward crossing.
    Up,
    /// Boundary of the usable part, `y = -rho v_r`.
    Bup,
    /// Nonusable part.
    Nup,
}

/// Classifies a point of the circle `|s| = rho` against the threshold `y = -rho v_r`.
pub fn boundary_class<T: Scalar>(params: &GameParams<T>, s: &RelState<T>) -> Result<BoundaryClass> {
    let rho = params.rho();
    let err = (s.range() - rho).abs();
    if err > T::c(1e-9) * rho {
        return Err(Error::NotOnBoundary { range_error: err.to_f64_lossy() });
    }
    let threshold = -rho * params.speed_ratio();
    if (s.y - threshold).abs() <= T::c(1e-12) * rho {
        Ok(BoundaryClass::Bup)
    } else if s.y < threshold {
        Ok(BoundaryClass::Up)
    } else {
        Ok(BoundaryClass::Nup)
    }
}
