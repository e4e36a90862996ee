use rayon::prelude::*;
use serde::Serialize;

use super::grid::{CellRegion, ValueGrid};
use crate::error::{Error, Result};
use crate::model::{relative_dynamics, Controls, GameParams, RelState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DpOptions {
    pub resolution: usize,
    pub n_headings: usize,
    /// Stop when the sup-norm change falls below `tol_factor * dt`.
    pub tol_factor: f64,
    pub max_iters: usize,
}

impl Default for DpOptions {
    fn default() -> Self {
        Self { resolution: 201, n_headings: 64, tol_factor: 1e-6, max_iters: 200_000 }
    }
}

/// One control's transition: a stencil on the polar mesh at the step image,
/// or an exit from the disk after `fr` time units when `ir == EXIT`.
#[derive(Debug, Clone, Copy)]
struct Stencil {
    ir: u32,
    it: u32,
    fr: f32,
    ft: f32,
}

const EXIT: u32 = u32::MAX;

/// Polar mesh over the disk: `nr` rings from the centre to the circle and
/// `nt` bearings per ring. Ring 0 is the centre.
#[derive(Debug, Clone, Copy)]
struct Polar {
    nr: usize,
    nt: usize,
    dr: f64,
    dtheta: f64,
}

impl Polar {
    fn node(&self, ir: usize, it: usize) -> RelState<f64> {
        let (r, th) = (self.dr * ir as f64, self.dtheta * it as f64);
        RelState::new(r * th.sin(), r * th.cos())
    }

    /// Bilinear weights in `(r, theta)`; `r` is clamped to the mesh.
    fn locate(&self, s: &RelState<f64>) -> (usize, usize, f64, f64) {
        let gr = (s.range() / self.dr).min((self.nr - 1) as f64);
        let ir = (gr.floor() as usize).min(self.nr - 2);
        let th = s.x.atan2(s.y).rem_euclid(std::f64::consts::TAU);
        let gt = th / self.dtheta;
        let it = (gt.floor() as usize) % self.nt;
        (ir, it, gr - ir as f64, gt - gt.floor())
    }

    fn sample(&self, v: &[f64], ir: usize, it: usize, fr: f64, ft: f64) -> f64 {
        let nt = self.nt;
        let it1 = (it + 1) % nt;
        let lo = v[ir * nt + it] * (1.0 - ft) + v[ir * nt + it1] * ft;
        let hi = v[(ir + 1) * nt + it] * (1.0 - ft) + v[(ir + 1) * nt + it1] * ft;
        lo * (1.0 - fr) + hi * fr
    }
}

/// Min-max time to reach the circle by semi-Lagrangian value iteration.
///
/// The iteration runs on a polar mesh whose outer ring lies on the circle, with
/// ring spacing `h = 2 rho / (resolution - 1)` and about `2 pi rho / h` bearings.
/// Each sweep updates every node from the previous iterate (Jacobi):
/// `V = min over u_e in {-1, 0, 1} of max over headings of (dt + V(s + dt f))`,
/// `dt = h / (v_e + v_p)`, with the step replaced by its exit time when the
/// image leaves the disk. The result is resampled bilinearly onto the
/// `resolution x resolution` Cartesian grid.
pub fn dp_oracle(params: &GameParams<f64>, opts: &DpOptions) -> Result<ValueGrid> {
    let n = opts.resolution;
    if n < 51 {
        return Err(Error::InvalidParams(format!("oracle resolution must be >= 51, got {n}")));
    }
    if opts.n_headings < 16 {
        return Err(Error::InvalidParams(format!("oracle needs >= 16 headings, got {}", opts.n_headings)));
    }
    if params.v_p() >= params.v_e() {
        return Err(Error::DegenerateGame(crate::kind::classify(params)));
    }
    let rho = params.rho();
    let h = 2.0 * rho / (n - 1) as f64;
    let dt = h / (params.v_e() + params.v_p());
    let nr = (n - 1) / 2 + 1;
    let nt = 4 * ((std::f64::consts::TAU * rho / h / 4.0).ceil() as usize).max(4);
    let mesh = Polar { nr, nt, dr: rho / (nr - 1) as f64, dtheta: std::f64::consts::TAU / nt as f64 };

    let nh = opts.n_headings;
    let per_node = 3 * nh;
    let headings: Vec<f64> =
        (0..nh).map(|k| -std::f64::consts::PI + std::f64::consts::TAU * k as f64 / nh as f64).collect();
    let stencils: Vec<Stencil> = (0..nr * nt)
        .into_par_iter()
        .flat_map_iter(|k| {
            let s = mesh.node(k / nt, k % nt);
            let headings = &headings;
            [-1.0, 0.0, 1.0].into_iter().flat_map(move |u_e| {
                headings.iter().map(move |&u_p| {
                    let f = relative_dynamics(params, &s, &Controls::new(u_e, u_p));
                    let nx = s + f * dt;
                    if nx.range() > rho {
                        // |s + l f| = rho, outer root
                        let a = f.dot(&f);
                        let b = 2.0 * s.dot(&f);
                        let c = s.dot(&s) - rho * rho;
                        let l = ((-b + (b * b - 4.0 * a * c).max(0.0).sqrt()) / (2.0 * a)).clamp(0.0, dt);
                        Stencil { ir: EXIT, it: 0, fr: l as f32, ft: 0.0 }
                    } else {
                        let (ir, it, fr, ft) = mesh.locate(&nx);
                        Stencil { ir: ir as u32, it: it as u32, fr: fr as f32, ft: ft as f32 }
                    }
                })
            })
        })
        .collect();

    let mut v = vec![0.0f64; nr * nt];
    let mut next = vec![0.0f64; nr * nt];
    let tol = opts.tol_factor * dt;
    let mut converged = false;
    for _ in 0..opts.max_iters {
        next.par_iter_mut().enumerate().for_each(|(k, out)| {
            let st = &stencils[k * per_node..(k + 1) * per_node];
            let mut best = f64::INFINITY;
            for u in 0..3 {
                let mut worst = f64::NEG_INFINITY;
                for s in &st[u * nh..(u + 1) * nh] {
                    let val = if s.ir == EXIT {
                        s.fr as f64
                    } else {
                        dt + mesh.sample(&v, s.ir as usize, s.it as usize, s.fr as f64, s.ft as f64)
                    };
                    worst = worst.max(val);
                }
                best = best.min(worst);
            }
            *out = best;
        });
        // the centre ring is a single point
        let centre = next[..nt].iter().sum::<f64>() / nt as f64;
        next[..nt].fill(centre);
        let change = v.iter().zip(&next).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        std::mem::swap(&mut v, &mut next);
        if change < tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence(format!("value iteration did not settle in {} sweeps", opts.max_iters)));
    }
    let mut grid = ValueGrid::empty(n, rho);
    for j in 0..n {
        for i in 0..n {
            if !grid.is_inside(i, j) {
                continue;
            }
            let (ir, it, fr, ft) = mesh.locate(&grid.state(i, j));
            let k = grid.index(i, j);
            grid.values[k] = Some(mesh.sample(&v, ir, it, fr, ft));
            grid.regions[k] = Some(CellRegion::Dp);
        }
    }
    Ok(grid)
}
