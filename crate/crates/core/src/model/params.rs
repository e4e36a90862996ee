use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Physical constants of the game.
///
/// `v_e` evader speed, `v_p` pursuer speed, `omega_e` evader turn-rate bound
/// and `rho` the surveillance radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GameParams<T> {
    v_e: T,
    v_p: T,
    omega_e: T,
    rho: T,
}

impl<T: Scalar> GameParams<T> {
    pub fn new(v_e: T, v_p: T, omega_e: T, rho: T) -> Result<Self> {
        let finite = [v_e, v_p, omega_e, rho].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParams("parameters must be finite".into()));
        }
        if v_e <= T::zero() {
            return Err(Error::InvalidParams(format!("v_e must be > 0, got {v_e}")));
        }
        if v_p < T::zero() {
            return Err(Error::InvalidParams(format!("v_p must be >= 0, got {v_p}")));
        }
        if omega_e <= T::zero() {
            return Err(Error::InvalidParams(format!("omega_e must be > 0, got {omega_e}")));
        }
        if rho <= T::zero() {
            return Err(Error::InvalidParams(format!("rho must be > 0, got {rho}")));
        }
        Ok(Self { v_e, v_p, omega_e, rho })
    }

    pub fn v_e(&self) -> T {
        self.v_e
    }

    pub fn v_p(&self) -> T {
        self.v_p
    }

    pub fn omega_e(&self) -> T {
        self.omega_e
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    /// `v_p / v_e`.
    pub fn speed_ratio(&self) -> T {
        self.v_p / self.v_e
    }

    /// Closing speed `v_e - v_p` of the straight-line race.
    pub fn closing_speed(&self) -> T {
        self.v_e - self.v_p
    }

    /// Upper bound `2 rho / (v_e - v_p)` on the escape time, `None` if the
    /// pursuer is at least as fast.
    pub fn escape_bound(&self) -> Option<T> {
        (self.v_p < self.v_e).then(|| (self.rho + self.rho) / self.closing_speed())
    }

    /// Default integrator step `1e-3 * min(1 / omega_e, rho / v_e)`.
    pub fn default_dt(&self) -> T {
        T::c(1e-3) * (T::one() / self.omega_e).min(self.rho / self.v_e)
    }

    /// Same parameters with a different pursuer speed.
    pub fn with_pursuer_speed(&self, v_p: T) -> Result<Self> {
        Self::new(self.v_e, v_p, self.omega_e, self.rho)
    }

    pub fn cast<U: Scalar>(&self) -> GameParams<U> {
        GameParams {
            v_e: U::c(self.v_e.to_f64_lossy()),
            v_p: U::c(self.v_p.to_f64_lossy()),
            omega_e: U::c(self.omega_e.to_f64_lossy()),
            rho: U::c(self.rho.to_f64_lossy()),
        }
    }
}

impl Default for GameParams<f64> {
    /// Running example: `v_e = 2`, `v_p = 1`, `omega_e = 1`, `rho = 1`.
    fn default() -> Self {
        Self { v_e: 2.0, v_p: 1.0, omega_e: 1.0, rho: 1.0 }
    }
}
