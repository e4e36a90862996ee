use serde::Serialize;

use super::{Controls, RelState};
use crate::scalar::Scalar;

/// Source of controls for the integrator.
///
/// `anchor` is a time strictly inside the integration step being taken; piecewise
/// schedules use it to pick the active piece so that stage evaluations landing
/// exactly on a breakpoint still see the piece of the current step.
pub trait ControlPolicy<T: Scalar> {
    fn controls_at(&self, t: T, s: &RelState<T>, anchor: T) -> Controls<T>;

    /// Times at which the controls may jump; steps are cut to land on them.
    fn breakpoints(&self) -> Vec<T> {
        Vec::new()
    }
}

/// Closed-form control law on one piece. `u_p` is affine in time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ControlLaw<T> {
    Constant { u_e: T, u_p: T },
    /// `u_p(t) = u_p0 + rate * (t - piece start)`.
    LinearHeading { u_e: T, u_p0: T, rate: T },
}

impl<T: Scalar> ControlLaw<T> {
    pub fn u_e(&self) -> T {
        match *self {
            ControlLaw::Constant { u_e, .. } | ControlLaw::LinearHeading { u_e, .. } => u_e,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControlPiece<T> {
    pub start: T,
    pub end: T,
    pub law: ControlLaw<T>,
}

impl<T: Scalar> ControlPiece<T> {
    pub fn eval(&self, t: T) -> Controls<T> {
        match self.law {
            ControlLaw::Constant { u_e, u_p } => Controls::new(u_e, u_p),
            ControlLaw::LinearHeading { u_e, u_p0, rate } => {
                Controls::new(u_e, u_p0 + rate * (t - self.start))
            }
        }
    }
}

/// Open-loop schedule: ordered, contiguous pieces. Evaluation is
/// right-continuous; times past the last piece extend the last law.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ControlSchedule<T> {
    pieces: Vec<ControlPiece<T>>,
}

impl<T: Scalar> ControlSchedule<T> {
    pub fn new() -> Self {
        Self { pieces: Vec::new() }
    }

    /// Schedule holding `controls` for all time.
    pub fn constant(controls: Controls<T>) -> Self {
        Self {
            pieces: vec![ControlPiece {
                start: T::zero(),
                end: T::infinity(),
                law: ControlLaw::Constant { u_e: controls.u_e, u_p: controls.u_p },
            }],
        }
    }

    /// Append a piece of the given duration after the current end.
    pub fn push(&mut self, duration: T, law: ControlLaw<T>) {
        let start = self.end();
        self.pieces.push(ControlPiece { start, end: start + duration, law });
    }

    pub fn pieces(&self) -> &[ControlPiece<T>] {
        &self.pieces
    }

    pub fn end(&self) -> T {
        self.pieces.last().map_or(T::zero(), |p| p.end)
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    fn piece_index(&self, t: T) -> Option<usize> {
        if self.pieces.is_empty() {
            return None;
        }
        let idx = self.pieces.partition_point(|p| p.end <= t);
        Some(idx.min(self.pieces.len() - 1))
    }

    pub fn eval(&self, t: T) -> Controls<T> {
        self.piece_index(t).map_or_else(Controls::default, |i| self.pieces[i].eval(t))
    }

    /// Schedule run backwards over `[0, span]`: the result at `t` equals the
    /// original at `span - t`.
    pub fn time_reversed(&self, span: T) -> Self {
        let mut out = Self::new();
        for p in self.pieces.iter().rev() {
            let end = p.end.min(span);
            if end <= p.start {
                continue;
            }
            let law = match p.law {
                ControlLaw::Constant { .. } => p.law,
                ControlLaw::LinearHeading { u_e, u_p0, rate } => ControlLaw::LinearHeading {
                    u_e,
                    u_p0: u_p0 + rate * (end - p.start),
                    rate: -rate,
                },
            };
            out.push(end - p.start, law);
        }
        out
    }

    /// Mirror image: both controls negated.
    pub fn mirrored(&self) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| ControlPiece {
                law: match p.law {
                    ControlLaw::Constant { u_e, u_p } => ControlLaw::Constant { u_e: -u_e, u_p: -u_p },
                    ControlLaw::LinearHeading { u_e, u_p0, rate } => {
                        ControlLaw::LinearHeading { u_e: -u_e, u_p0: -u_p0, rate: -rate }
                    }
                },
                ..*p
            })
            .collect();
        Self { pieces }
    }
}

impl<T: Scalar> ControlPolicy<T> for ControlSchedule<T> {
    fn controls_at(&self, t: T, _s: &RelState<T>, anchor: T) -> Controls<T> {
        self.piece_index(anchor).map_or_else(Controls::default, |i| self.pieces[i].eval(t))
    }

    fn breakpoints(&self) -> Vec<T> {
        self.pieces.iter().map(|p| p.end).filter(|e| e.is_finite()).collect()
    }
}

/// State feedback wrapped as a policy.
pub struct FeedbackPolicy<F>(pub F);

impl<T: Scalar, F> ControlPolicy<T> for FeedbackPolicy<F>
where
    F: Fn(T, &RelState<T>) -> Controls<T>,
{
    fn controls_at(&self, t: T, s: &RelState<T>, _anchor: T) -> Controls<T> {
        (self.0)(t, s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn right_continuous_with_anchor_override() {
        let mut sch = ControlSchedule::<f64>::new();
        sch.push(1.0, ControlLaw::Constant { u_e: 1.0, u_p: 0.0 });
        sch.push(2.0, ControlLaw::LinearHeading { u_e: -1.0, u_p0: 0.5, rate: 2.0 });
        assert_eq!(sch.eval(1.0).u_e, -1.0);
        assert_eq!(sch.eval(0.999).u_e, 1.0);
        let s = RelState::new(0.0, 0.0);
        assert_eq!(sch.controls_at(1.0, &s, 0.5).u_e, 1.0);
        assert!((sch.eval(2.0).u_p - 2.5).abs() < 1e-15);
        assert_eq!(sch.breakpoints(), vec![1.0, 3.0]);
        // past the end the last law is extended
        assert!((sch.eval(4.0).u_p - 6.5).abs() < 1e-15);
        let m = sch.mirrored();
        assert!((m.eval(2.0).u_p + 2.5).abs() < 1e-15);
        assert_eq!(m.eval(0.0).u_e, -1.0);
    }

    #[test]
    fn time_reversal_matches_original() {
        let mut sch = ControlSchedule::<f64>::new();
        sch.push(1.0, ControlLaw::Constant { u_e: 1.0, u_p: 0.3 });
        sch.push(2.0, ControlLaw::LinearHeading { u_e: -1.0, u_p0: 0.5, rate: 2.0 });
        let r = sch.time_reversed(3.0);
        for t in [0.1, 0.7, 1.5, 2.2, 2.9] {
            let a = r.eval(t);
            let b = sch.eval(3.0 - t);
            assert_eq!(a.u_e, b.u_e);
            assert!((a.u_p - b.u_p).abs() < 1e-12);
        }
    }
}
