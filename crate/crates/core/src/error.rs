use thiserror::Error;

use crate::kind::KindOutcome;

/// Errors raised by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("trajectory has no samples")]
    EmptyTrajectory,
    #[error("event bracketing failed near t = {t}")]
    StepTooLarge { t: f64 },
    #[error("state became non-finite at t = {t}")]
    NonfiniteState { t: f64 },
    #[error("operation not available in this regime: {0}")]
    WrongRegime(String),
    #[error("state is not on the surveillance circle (range error {range_error:e})")]
    NotOnBoundary { range_error: f64 },
    #[error("terminal angle {theta0} is not on the usable part")]
    NotUsable { theta0: f64 },
    #[error("backward time must be non-negative, got {0}")]
    NegativeTau(f64),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("root polishing did not converge: {0}")]
    NoConvergence(String),
    #[error("bearing undefined at the origin")]
    OriginState,
    #[error("no characteristic reaches the state (nearest misses: A {miss_a:e}, B {miss_b:e}, C {miss_c:e})")]
    NoCharacteristic { miss_a: f64, miss_b: f64, miss_c: f64 },
    #[error("game of degree is degenerate: {0:?}")]
    DegenerateGame(KindOutcome),
    #[error("state lies outside the game set")]
    OutsideGameSet,
    #[error("replay diverged from the closed form (max deviation {deviation:e})")]
    ReplayDiverged { deviation: f64 },
    #[error("escape not reached within horizon {horizon}")]
    HorizonExceeded { horizon: f64 },
    #[error("{0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
