use crate::error::{Error, Result};
use crate::model::{relative_dynamics, rk4_step, Controls, GameParams, RelState};
use crate::synthesis::{evader_feedback, gamma_critical};

/// Nash evader against a pure-pursuit pursuer (`u_p = pi + theta`).
#[derive(Debug, Clone, Copy)]
pub struct PurePursuit {
    params: GameParams<f64>,
    y_sharp: Option<f64>,
}

impl PurePursuit {
    pub fn new(params: GameParams<f64>) -> Result<Self> {
        if params.v_p() >= params.v_e() {
            return Err(Error::DegenerateGame(crate::kind::classify(&params)));
        }
        let y_sharp = gamma_critical(&params)?.map(|c| c.y0_sharp_physical(&params));
        Ok(Self { params, y_sharp })
    }

    fn heading(s: &RelState<f64>) -> f64 {
        std::f64::consts::PI + s.x.atan2(s.y)
    }

    /// Time for the evader to reach the circle from a point sliding on the axis.
    fn axis_time(&self, y: f64) -> f64 {
        let p = &self.params;
        if y > 0.0 {
            y / (p.v_e() + p.v_p()) + p.rho() / p.closing_speed()
        } else {
            (p.rho() + y) / p.closing_speed()
        }
    }

    fn slides(&self, s: &RelState<f64>) -> bool {
        s.x.abs() <= 1e-9 * self.params.rho() && s.y <= self.y_sharp.unwrap_or(0.0)
    }

    /// Escape time from `s0`.
    ///
    /// On the part of the axis where the evader goes straight the state slides
    /// along it and the remaining time is exact; elsewhere the evader's turn is
    /// frozen over each step and axis crossings are localized by bisection.
    pub fn time(&self, s0: RelState<f64>) -> Result<f64> {
        let p = &self.params;
        let rho = p.rho();
        if s0.range() > rho * (1.0 + 1e-9) {
            return Err(Error::OutsideGameSet);
        }
        let horizon = 4.0 * p.escape_bound().unwrap_or(f64::INFINITY);
        let dt = p.default_dt();
        let mut s = s0;
        let mut t = 0.0;

        let step = |s: &RelState<f64>, u_e: f64, h: f64| {
            let out = rk4_step(
                |_, v: &[f64; 2]| {
                    let st = RelState::new(v[0], v[1]);
                    let f = relative_dynamics(p, &st, &Controls::new(u_e, Self::heading(&st)));
                    [f.x, f.y]
                },
                0.0,
                &[s.x, s.y],
                h,
            );
            RelState::new(out[0], out[1])
        };

        loop {
            if self.slides(&s) {
                return Ok(t + self.axis_time(s.y));
            }
            let u_e = evader_feedback(p, &s, self.y_sharp)?.pick::<f64>();
            if s.range() >= rho * (1.0 - 1e-12) {
                let f = relative_dynamics(p, &s, &Controls::new(u_e, Self::heading(&s)));
                if f.dot(&s) > 0.0 {
                    return Ok(t);
                }
            }
            if t > horizon {
                return Err(Error::HorizonExceeded { horizon });
            }
            let s1 = step(&s, u_e, dt);
            let crosses_axis = s.x != 0.0 && (s1.x == 0.0 || s1.x.signum() != s.x.signum());
            let exits = s.range() <= rho && s1.range() > rho;
            if !crosses_axis && !exits {
                s = s1;
                t += dt;
                continue;
            }
            // earliest of the two events
            let hit = |h: f64| {
                let z = step(&s, u_e, h);
                let ax = crosses_axis && (z.x == 0.0 || z.x.signum() != s.x.signum());
                let ex = exits && z.range() > rho;
                ax || ex
            };
            let (mut lo, mut hi) = (0.0, dt);
            while hi - lo > 1e-13 {
                let mid = 0.5 * (lo + hi);
                if hit(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let z = step(&s, u_e, hi);
            t += hi;
            if exits && z.range() > rho * (1.0 - 1e-12) {
                return Ok(t);
            }
            s = RelState::new(0.0, z.y);
            if !self.slides(&s) {
                // crossing above the sliding part: continue on the far side
                s = z;
            }
        }
    }
}

/// Escape time of the Nash evader against pure pursuit.
pub fn pure_pursuit_time(params: &GameParams<f64>, s0: RelState<f64>) -> Result<f64> {
    PurePursuit::new(*params)?.time(s0)
}
