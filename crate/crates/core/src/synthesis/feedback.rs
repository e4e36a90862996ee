use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{GameParams, RelState};
use crate::scalar::Scalar;

/// Admissible evader turn commands at a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TurnSet {
    /// `{-1}`
    Minus,
    /// `{+1}`
    Plus,
    /// `{0}`
    Straight,
    /// `{-1, +1}` on the dispersal surface.
    Either,
}

impl TurnSet {
    pub fn contains<T: Scalar>(&self, u: T) -> bool {
        match self {
            TurnSet::Minus => u == -T::one(),
            TurnSet::Plus => u == T::one(),
            TurnSet::Straight => u == T::zero(),
            TurnSet::Either => u == T::one() || u == -T::one(),
        }
    }

    /// Deterministic single-valued pick; the dispersal tie goes to `-1`.
    pub fn pick<T: Scalar>(&self) -> T {
        match self {
            TurnSet::Minus | TurnSet::Either => -T::one(),
            TurnSet::Plus => T::one(),
            TurnSet::Straight => T::zero(),
        }
    }
}

/// Bearing-only Nash strategy of the evader.
///
/// `y0_sharp` is the physical height of the universal/dispersal split on the
/// upper axis; pass `None` when `v_r <= 1/2` (the split is then at 0).
pub fn evader_feedback<T: Scalar>(
    params: &GameParams<T>,
    s: &RelState<T>,
    y0_sharp: Option<T>,
) -> Result<TurnSet> {
    if s.x == T::zero() && s.y == T::zero() {
        return Err(Error::OriginState);
    }
    let _ = params;
    if s.x > T::zero() {
        Ok(TurnSet::Minus)
    } else if s.x < T::zero() {
        Ok(TurnSet::Plus)
    } else if s.y < T::zero() {
        Ok(TurnSet::Straight)
    } else if s.y <= y0_sharp.unwrap_or(T::zero()) {
        Ok(TurnSet::Straight)
    } else {
        Ok(TurnSet::Either)
    }
}
