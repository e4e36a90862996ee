use serde::Serialize;

use super::solution::{Phase, PhaseRegion, Plan, Solution};
use crate::error::{Error, Result};
use crate::kind::classify;
use crate::model::{
    ControlLaw, Direction, GameParams, RelState, TimedTrajectory, TrajectorySample,
};
use crate::synthesis::{gamma_critical, Characteristic, CriticalPoint, Region};

const LATTICE: usize = 40;
const SEEDS_PER_FAMILY: usize = 4;
/// Samples per phase of the closed-form trajectory attached to a solution.
const SAMPLES_PER_PHASE: usize = 200;

/// Converged root `(family, q, t)` usable as a warm start for a nearby state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Hint {
    pub region: Region,
    pub q: f64,
    pub t: f64,
}

/// Where a state sits in the synthesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Located {
    Axis { y: f64, value: f64, origin: bool },
    Arc { ch: Characteristic<f64>, s: f64, value: f64, mirrored: bool, dispersal: bool },
}

impl Located {
    pub fn value(&self) -> f64 {
        match self {
            Located::Axis { value, .. } | Located::Arc { value, .. } => *value,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Seed {
    q: f64,
    t: f64,
    state: RelState<f64>,
}

/// Inverts the characteristic families for one parameter set.
///
/// States with `x < 0` are solved through their mirror image. Families are
/// tried in the order A, B, C, each from warm start (if any) and then from the
/// nearest points of a 40 x 40 parameter lattice.
#[derive(Debug, Clone)]
pub struct Solver {
    params: GameParams<f64>,
    crit: Option<CriticalPoint<f64>>,
    y_sharp: f64,
    theta_min: f64,
    lattices: [Vec<Seed>; 3],
}

fn family_index(r: Region) -> usize {
    match r {
        Region::A => 0,
        Region::B => 1,
        Region::C => 2,
    }
}

impl Solver {
    pub fn new(params: GameParams<f64>) -> Result<Self> {
        if params.v_p() >= params.v_e() {
            return Err(Error::DegenerateGame(classify(&params)));
        }
        let crit = gamma_critical(&params)?;
        let y_sharp = crit.map_or(0.0, |c| c.y0_sharp_physical(&params));
        let theta_min = (-params.speed_ratio()).acos();
        let mut s = Self { params, crit, y_sharp, theta_min, lattices: [Vec::new(), Vec::new(), Vec::new()] };
        for r in [Region::A, Region::B, Region::C] {
            s.lattices[family_index(r)] = s.build_lattice(r);
        }
        Ok(s)
    }

    pub fn params(&self) -> &GameParams<f64> {
        &self.params
    }

    pub fn critical_point(&self) -> Option<CriticalPoint<f64>> {
        self.crit
    }

    /// Physical `y0#`, zero when region C is absent.
    pub fn y_sharp(&self) -> f64 {
        self.y_sharp
    }

    /// Open interval of the terminal parameter of a family on the `x > 0` side.
    fn q_range(&self, r: Region) -> Option<(f64, f64)> {
        let p = &self.params;
        match r {
            Region::A => Some((self.theta_min, std::f64::consts::PI)),
            Region::B => Some((-p.rho(), 0.0)),
            Region::C => self.crit.map(|_| (0.0, self.y_sharp)),
        }
    }

    fn characteristic(&self, r: Region, q: f64) -> Result<Characteristic<f64>> {
        match r {
            Region::A => Characteristic::region_a(&self.params, q),
            Region::B => Characteristic::region_b(&self.params, q, -1.0),
            Region::C => {
                let crit = self.crit.ok_or_else(|| Error::WrongRegime("no region C".into()))?;
                Characteristic::region_c(&self.params, &crit, q, -1.0)
            }
        }
    }

    fn build_lattice(&self, r: Region) -> Vec<Seed> {
        let Some((lo, hi)) = self.q_range(r) else { return Vec::new() };
        let mut out = Vec::with_capacity(LATTICE * LATTICE);
        for i in 0..LATTICE {
            let q = lo + (hi - lo) * (i as f64 + 0.5) / LATTICE as f64;
            let Ok(ch) = self.characteristic(r, q) else { continue };
            for j in 0..LATTICE {
                let t = ch.span() * j as f64 / (LATTICE - 1) as f64;
                out.push(Seed { q, t, state: ch.at(&self.params, t).state });
            }
        }
        out
    }

    /// Closed-form state of family `r` at parameters `(q, t)`, without validity checks.
    fn eval(&self, r: Region, q: f64, t: f64) -> Option<RelState<f64>> {
        self.characteristic(r, q).ok().map(|ch| ch.at(&self.params, t))
            .map(|p| p.state)
    }

    fn newton(&self, r: Region, target: &RelState<f64>, seed: (f64, f64)) -> Option<(f64, f64)> {
        let (lo, hi) = self.q_range(r)?;
        let tol = 1e-9 * self.params.rho();
        let clamp_q = |q: f64| q.clamp(lo + 1e-13 * (hi - lo).abs().max(1.0), hi);
        let mut z = (clamp_q(seed.0), seed.1.max(0.0));
        let resid = |z: (f64, f64)| self.eval(r, z.0, z.1).map(|s| s - *target);
        let mut f = resid(z)?;
        for _ in 0..60 {
            if f.range() < tol {
                return Some(z);
            }
            let hq = 1e-7 * z.0.abs().max(1.0);
            let ht = 1e-7 * z.1.abs().max(1.0);
            let q_step = if z.0 + hq > hi { -hq } else { hq };
            let fq = (resid((z.0 + q_step, z.1))? - f) * (1.0 / q_step);
            let ft = (resid((z.0, z.1 + ht))? - f) * (1.0 / ht);
            let det = fq.x * ft.y - ft.x * fq.y;
            if det == 0.0 || !det.is_finite() {
                return None;
            }
            let dq = (ft.y * f.x - ft.x * f.y) / det;
            let dt = (fq.x * f.y - fq.y * f.x) / det;
            let mut lambda = 1.0;
            loop {
                let trial = (clamp_q(z.0 - lambda * dq), (z.1 - lambda * dt).max(0.0));
                if let Some(ft2) = resid(trial) {
                    if ft2.range() < f.range() {
                        z = trial;
                        f = ft2;
                        break;
                    }
                }
                lambda *= 0.5;
                if lambda < 1e-8 {
                    return (f.range() < tol).then_some(z);
                }
            }
        }
        (f.range() < tol).then_some(z)
    }

    /// Tries one family; returns the characteristic and natural parameter.
    fn try_family(
        &self,
        r: Region,
        target: &RelState<f64>,
        hint: Option<&Hint>,
    ) -> std::result::Result<(Characteristic<f64>, f64), f64> {
        let lat = &self.lattices[family_index(r)];
        if lat.is_empty() {
            return Err(f64::INFINITY);
        }
        let mut seeds: Vec<(f64, f64)> = Vec::with_capacity(SEEDS_PER_FAMILY + 1);
        if let Some(h) = hint.filter(|h| h.region == r) {
            seeds.push((h.q, h.t));
        }
        let mut near: Vec<(f64, usize)> =
            lat.iter().enumerate().map(|(k, s)| ((s.state - *target).range(), k)).collect();
        let n = SEEDS_PER_FAMILY.min(near.len());
        near.select_nth_unstable_by(n - 1, |a, b| a.0.total_cmp(&b.0));
        near[..n].sort_by(|a, b| a.0.total_cmp(&b.0));
        let best_miss = near[0].0;
        seeds.extend(near[..n].iter().map(|&(_, k)| (lat[k].q, lat[k].t)));

        let slack = 1e-9 * self.params.rho().max(1.0);
        for seed in seeds {
            let Some((q, t)) = self.newton(r, target, seed) else { continue };
            let Ok(ch) = self.characteristic(r, q) else { continue };
            if t <= ch.span() + slack {
                return Ok((ch, t.min(ch.span())));
            }
        }
        Err(best_miss)
    }

    /// Locates `s0` in the synthesis and evaluates the value there.
    pub fn locate(&self, s0: &RelState<f64>, hint: Option<&Hint>) -> Result<Located> {
        let p = &self.params;
        let rho = p.rho();
        if !s0.is_finite() {
            return Err(Error::NonfiniteState { t: 0.0 });
        }
        if s0.range() > rho * (1.0 + 1e-9) {
            return Err(Error::OutsideGameSet);
        }
        let dv = p.closing_speed();
        let on_axis = s0.x.abs() <= 1e-12 * rho;
        if on_axis && s0.y <= self.y_sharp {
            return Ok(Located::Axis {
                y: s0.y,
                value: (rho + s0.y) / dv,
                origin: s0.y.abs() <= 1e-12 * rho,
            });
        }
        let mirrored = s0.x < 0.0;
        let target = if mirrored { s0.mirrored() } else { RelState::new(s0.x.abs(), s0.y) };
        let mut misses = [f64::INFINITY; 3];
        for r in [Region::A, Region::B, Region::C] {
            match self.try_family(r, &target, hint) {
                Ok((ch, s)) => {
                    return Ok(Located::Arc {
                        ch,
                        s,
                        value: ch.value_at(p, s),
                        mirrored,
                        dispersal: on_axis,
                    })
                }
                Err(m) => misses[family_index(r)] = m,
            }
        }
        Err(Error::NoCharacteristic { miss_a: misses[0], miss_b: misses[1], miss_c: misses[2] })
    }

    /// Warm start reproducing a located arc.
    pub fn hint_for(loc: &Located) -> Option<Hint> {
        match loc {
            Located::Arc { ch, s, .. } => Some(Hint { region: ch.region, q: ch.terminal_param, t: *s }),
            Located::Axis { .. } => None,
        }
    }

    pub fn solve(&self, s0: RelState<f64>) -> Result<Solution> {
        let loc = self.locate(&s0, None)?;
        Ok(self.solution_from(s0, &loc))
    }

    /// Expands a located state into phases, schedule data and a sampled trajectory.
    pub fn solution_from(&self, s0: RelState<f64>, loc: &Located) -> Solution {
        let p = &self.params;
        let w = p.omega_e();
        let dv = p.closing_speed();
        let (plan, phases, dispersal, origin) = match *loc {
            Located::Axis { y, origin, .. } => {
                let ph = Phase {
                    region: PhaseRegion::Axis,
                    duration: (p.rho() + y) / dv,
                    law: ControlLaw::Constant { u_e: 0.0, u_p: 0.0 },
                };
                (Plan::Axis { y0: y }, vec![ph], false, origin)
            }
            Located::Arc { ch, s, mirrored, dispersal, .. } => {
                let e = ch.ue_sign;
                let law = match ch.region {
                    Region::A => ControlLaw::LinearHeading {
                        u_e: e,
                        u_p0: std::f64::consts::PI + ch.terminal_param + e * w * s,
                        rate: -e * w,
                    },
                    Region::B | Region::C => ControlLaw::LinearHeading {
                        u_e: e,
                        u_p0: e * w * (ch.tau_cross + s),
                        rate: -e * w,
                    },
                };
                let region = match ch.region {
                    Region::A => PhaseRegion::A,
                    Region::B => PhaseRegion::B,
                    Region::C => PhaseRegion::C,
                };
                let mut phases = vec![Phase { region, duration: s, law }];
                if let Some(h) = ch.axis_height(p) {
                    phases.push(Phase {
                        region: PhaseRegion::Axis,
                        duration: (p.rho() + h) / dv,
                        law: ControlLaw::Constant { u_e: 0.0, u_p: 0.0 },
                    });
                }
                if mirrored {
                    for ph in &mut phases {
                        ph.law = match ph.law {
                            ControlLaw::Constant { u_e, u_p } => ControlLaw::Constant { u_e: -u_e, u_p: -u_p },
                            ControlLaw::LinearHeading { u_e, u_p0, rate } => {
                                ControlLaw::LinearHeading { u_e: -u_e, u_p0: -u_p0, rate: -rate }
                            }
                        };
                    }
                }
                (Plan::Arc { ch, s_star: s, mirrored }, phases, dispersal, false)
            }
        };
        let first = phases[0];
        let mut phases: Vec<Phase> = phases.into_iter().filter(|ph| ph.duration > 0.0).collect();
        if phases.is_empty() {
            phases.push(first);
        }
        let t_star: f64 = phases.iter().map(|ph| ph.duration).sum();

        let mut sol = Solution {
            s0,
            t_star,
            phases,
            trajectory: TimedTrajectory::new(Direction::Forward),
            terminal_state: s0,
            dispersal,
            origin_extension: origin,
            plan,
        };
        let sch = super::optimal_controls(&sol);
        let mut t0 = 0.0;
        let mut samples = Vec::new();
        for (k, ph) in sol.phases.iter().enumerate() {
            let n = if ph.duration > 0.0 { SAMPLES_PER_PHASE } else { 0 };
            let first = if k == 0 { 0 } else { 1 };
            for i in first..=n {
                let t = t0 + ph.duration * i as f64 / n.max(1) as f64;
                if samples.last().map_or(false, |l: &TrajectorySample<f64>| t <= l.t) {
                    continue;
                }
                let state = if i == 0 && k == 0 { s0 } else { sol.state_at(p, t) };
                samples.push(TrajectorySample { t, state, controls: sch.eval(t) });
            }
            t0 += ph.duration;
        }
        if samples.is_empty() {
            samples.push(TrajectorySample { t: 0.0, state: s0, controls: sch.eval(0.0) });
        }
        sol.terminal_state = samples.last().map(|s| s.state).unwrap_or(s0);
        sol.trajectory.samples = samples;
        sol
    }
}

/// Value and Nash play from `s0`; see [`Solver`].
pub fn solve(params: &GameParams<f64>, s0: RelState<f64>) -> Result<Solution> {
    Solver::new(*params)?.solve(s0)
}
