//! Acceptance criteria 1-9. Prints one PASS/FAIL line per criterion and fails
//! if any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use prying_core::kind::{simulate_containment, straight_line_escape, EvaderSequence};
use prying_core::model::{GameParams, RelState};
use prying_core::solver::{
    dp_oracle, forward_verify, pure_pursuit_grid, value_grid, CellRegion, DpOptions, Solver, ValueGrid,
};
use prying_core::synthesis::{gamma_critical_vr, Characteristic, CharPoint, Region};

fn params(ve: f64, vp: f64) -> GameParams<f64> {
    GameParams::new(ve, vp, 1.0, 1.0).unwrap()
}

struct Report {
    lines: Vec<(usize, bool, String)>,
}

impl Report {
    fn record(&mut self, n: usize, ok: bool, detail: String) {
        println!("criterion {n}: {} : {detail}", if ok { "PASS" } else { "FAIL" });
        self.lines.push((n, ok, detail));
    }
}

struct FigureRun {
    grid: ValueGrid,
    pp: ValueGrid,
    seconds: f64,
}

fn figure(p: &GameParams<f64>) -> FigureRun {
    let t0 = Instant::now();
    let grid = value_grid(p, 201).unwrap();
    let pp = pure_pursuit_grid(p, 201).unwrap();
    FigureRun { grid, pp, seconds: t0.elapsed().as_secs_f64() }
}

fn figure_criterion(r: &mut Report, n: usize, run: &FigureRun, opt_target: f64, pp_target: f64) {
    let vmax = run.grid.max_value().unwrap();
    let pmax = run.pp.max_value().unwrap();
    let ok_v = (vmax - opt_target).abs() <= 0.05 && run.grid.failures.is_empty();
    let ok_p = (pmax - pp_target).abs() <= 0.05;
    let ok_t = run.seconds <= 300.0;
    r.record(
        n,
        ok_v && ok_p && ok_t,
        format!(
            "value max {vmax:.4} (target {opt_target} +- 0.05, {}), pure-pursuit max {pmax:.4} (target {pp_target} +- 0.05, {}), {} failed cells, {:.1} s",
            if ok_v { "ok" } else { "off" },
            if ok_p { "ok" } else { "off" },
            run.grid.failures.len(),
            run.seconds
        ),
    );
}

/// Backward-time state rate `-f` along a characteristic point.
fn backward_rate(p: &GameParams<f64>, pt: &CharPoint<f64>) -> [f64; 2] {
    let (x, y) = (pt.state.x, pt.state.y);
    let (ue, up) = (pt.controls.u_e, pt.controls.u_p);
    let w = p.omega_e();
    let fx = -w * y * ue + p.v_p() * up.sin();
    let fy = w * x * ue - p.v_e() + p.v_p() * up.cos();
    [-fx, -fy]
}

fn hamiltonian(p: &GameParams<f64>, pt: &CharPoint<f64>) -> f64 {
    let r = backward_rate(p, pt);
    -(pt.adjoint.p_x * r[0] + pt.adjoint.p_y * r[1]) + 1.0
}

/// Backward-time adjoint rate `dH/dxi`.
fn adjoint_rate(p: &GameParams<f64>, pt: &CharPoint<f64>) -> [f64; 2] {
    let w = p.omega_e() * pt.controls.u_e;
    [w * pt.adjoint.p_y, -w * pt.adjoint.p_x]
}

fn fidelity(p: &GameParams<f64>, arcs: &[Characteristic<f64>]) -> (f64, f64, f64) {
    let (mut ode, mut adj, mut ham) = (0.0f64, 0.0f64, 0.0f64);
    let h = 1e-5;
    for ch in arcs {
        for k in 0..100 {
            let s = h + (ch.span() - 2.0 * h) * k as f64 / 99.0;
            let (a, b, c) = (ch.at(p, s - h), ch.at(p, s), ch.at(p, s + h));
            let ds = [(c.state.x - a.state.x) / (2.0 * h), (c.state.y - a.state.y) / (2.0 * h)];
            let dp = [(c.adjoint.p_x - a.adjoint.p_x) / (2.0 * h), (c.adjoint.p_y - a.adjoint.p_y) / (2.0 * h)];
            let f = backward_rate(p, &b);
            let g = adjoint_rate(p, &b);
            ode = ode.max((ds[0] - f[0]).abs()).max((ds[1] - f[1]).abs());
            adj = adj.max((dp[0] - g[0]).abs()).max((dp[1] - g[1]).abs());
            ham = ham.max(hamiltonian(p, &b).abs());
        }
    }
    (ode, adj, ham)
}

fn agreement(opt: &ValueGrid, dp: &ValueGrid, tmax: f64) -> f64 {
    let (mut ok, mut total) = (0usize, 0usize);
    for j in 0..opt.resolution {
        for i in 0..opt.resolution {
            if !opt.is_interior(i, j) {
                continue;
            }
            if let (Some(a), Some(b)) = (opt.value(i, j), dp.value(i, j)) {
                total += 1;
                if (a - b).abs() <= 0.02 * tmax {
                    ok += 1;
                }
            }
        }
    }
    ok as f64 / total.max(1) as f64
}

fn random_interior(rng: &mut ChaCha8Rng, rho: f64) -> RelState<f64> {
    let r = rho * rng.gen_range(0.0f64..0.999).sqrt();
    let th = rng.gen_range(-PI..PI);
    RelState::new(r * th.sin(), r * th.cos())
}

#[test]
fn acceptance() {
    let mut r = Report { lines: Vec::new() };
    let fig8 = params(2.0, 1.0);
    let fig9 = params(1.5, 1.0);

    // 1, 2
    let run8 = figure(&fig8);
    figure_criterion(&mut r, 1, &run8, 1.85, 1.08);
    let run9 = figure(&fig9);
    figure_criterion(&mut r, 2, &run9, 3.73, 2.04);

    // 3
    {
        let solver = Solver::new(fig8).unwrap();
        let mut worst = 0.0f64;
        for k in 0..20 {
            let y0 = -(k as f64 + 0.5) / 20.0;
            let v = solver.solve(RelState::new(0.0, y0)).unwrap().t_star;
            worst = worst.max((v - (1.0 + y0) / (2.0 - 1.0)).abs());
        }
        r.record(3, worst < 1e-6, format!("max |V(0, y0) - (rho + y0)/(v_e - v_p)| = {worst:.2e} over 20 heights"));
    }

    // 4
    {
        let esc = straight_line_escape(&fig8, RelState::new(0.0, 1.0)).unwrap();
        let err = (esc.time - 2.0).abs();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut max_range = 0.0f64;
        for ratio in [1.0, 1.5] {
            let ve = 1.0;
            let p = params(ve, ratio * ve);
            for _ in 0..50 {
                let s0 = random_interior(&mut rng, 1.0);
                let horizon = 50.0 / ve;
                let period = 1.0 / (4.0 * ve);
                let n = (horizon / period).ceil() as usize;
                let u_e = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let run = simulate_containment(&p, s0, &EvaderSequence { period, u_e }, horizon, 1e-3).unwrap();
                max_range = max_range.max(run.max_range);
            }
        }
        r.record(
            4,
            err <= 1e-8 && max_range <= 1.0 + 1e-6,
            format!("straight escape time error {err:.2e}; containment max range {max_range:.9} over 100 runs"),
        );
    }

    // 5
    {
        let mut ok = true;
        let mut notes = Vec::new();
        for vr in [0.2f64, 0.4, 0.5, 0.55, 2.0 / 3.0, 0.9] {
            let crit = gamma_critical_vr::<f64>(vr).unwrap();
            let present = vr > 0.5;
            let mut line = format!("v_r {vr:.3}: {}", if crit.is_some() { "present" } else { "absent" });
            if crit.is_some() != present {
                ok = false;
            }
            if let Some(c) = crit {
                let (t, y) = (c.tau_sharp, c.y0_sharp);
                let g = (y - vr * t) * t.sin() + 1.0 - t.cos();
                let gt = (y - vr * t) * t.cos() + (1.0 - vr) * t.sin();
                ok &= g.abs() < 1e-10 && gt.abs() < 1e-10;
                line += &format!(" res {:.1e}/{:.1e}", g.abs(), gt.abs());
            }
            let g = value_grid(&params(1.0 / vr, 1.0), 101).unwrap();
            let has_c = g.regions.iter().flatten().any(|&t| t == CellRegion::C);
            ok &= has_c == present && g.failures.is_empty();
            line += &format!(" C cells {}", if has_c { "yes" } else { "no" });
            notes.push(line);
        }
        r.record(5, ok, notes.join("; "));
    }

    // 6
    {
        let mut worst = (0.0f64, 0.0f64, 0.0f64);
        for p in [fig9, GameParams::new(2.0, 1.0, 2.0, 1.0).unwrap()] {
            let vr = p.speed_ratio();
            let lo = (-vr).acos();
            let a: Vec<_> = (0..20)
                .map(|k| Characteristic::region_a(&p, lo + (PI - lo) * (k as f64 + 0.5) / 20.0).unwrap())
                .collect();
            let b: Vec<_> = (0..20)
                .map(|k| Characteristic::region_b(&p, -(k as f64 + 0.5) / 20.0, -1.0).unwrap())
                .collect();
            let mut fams = vec![a, b];
            if let Some(crit) = prying_core::synthesis::gamma_critical(&p).unwrap() {
                let ys = crit.y0_sharp_physical(&p);
                fams.push(
                    (0..20)
                        .map(|k| Characteristic::region_c(&p, &crit, ys * (k as f64 + 0.5) / 20.0, -1.0).unwrap())
                        .collect(),
                );
            }
            for arcs in &fams {
                assert!(arcs.iter().all(|c| matches!(c.region, Region::A | Region::B | Region::C)));
                let f = fidelity(&p, arcs);
                worst = (worst.0.max(f.0), worst.1.max(f.1), worst.2.max(f.2));
            }
        }
        r.record(
            6,
            worst.0 < 1e-6 && worst.1 < 1e-6 && worst.2 < 1e-8,
            format!("ODE residual {:.2e}, adjoint residual {:.2e}, |H| {:.2e}", worst.0, worst.1, worst.2),
        );
    }

    // 7
    {
        let dp = |p: &GameParams<f64>| {
            dp_oracle(p, &DpOptions { resolution: 201, n_headings: 64, ..DpOptions::default() }).unwrap()
        };
        let a8 = agreement(&run8.grid, &dp(&fig8), 2.0);
        let a9 = agreement(&run9.grid, &dp(&fig9), 4.0);
        let still = params(2.0, 0.0);
        let a0 = agreement(&value_grid(&still, 201).unwrap(), &dp(&still), 1.0);
        r.record(
            7,
            a8 >= 0.95 && a9 >= 0.95 && a0 >= 0.99,
            format!("cells within 2% of T_max: {:.2}% (v_e 2), {:.2}% (v_e 1.5), {:.2}% (v_p 0)", a8 * 100.0, a9 * 100.0, a0 * 100.0),
        );
    }

    // 8 and the descent part of 9
    let mut descent_ok = true;
    {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (mut range_err, mut min_trans, mut time_err) = (0.0f64, f64::INFINITY, 0.0f64);
        let mut passed = 0;
        for p in [fig8, fig9] {
            let solver = Solver::new(p).unwrap();
            for _ in 0..100 {
                let sol = solver.solve(random_interior(&mut rng, 1.0)).unwrap();
                let rep = forward_verify(&p, &sol).unwrap();
                range_err = range_err.max(rep.terminal_range_error);
                min_trans = min_trans.min(rep.transversality);
                let exit = rep.exit_time.unwrap_or(f64::INFINITY);
                time_err = time_err.max((exit - sol.t_star).abs() / sol.t_star.max(1e-12));
                passed += rep.passed as usize;
                let slope = p.v_p() - p.v_e();
                descent_ok &= rep
                    .trajectory
                    .samples
                    .iter()
                    .all(|s| s.state.y - sol.s0.y <= s.t * slope + 1e-9);
            }
        }
        r.record(
            8,
            range_err < 1e-5 && min_trans > 0.0 && time_err < 1e-5 && passed == 200,
            format!(
                "200 replays: range error {range_err:.2e}, min f.xi {min_trans:.3e}, relative exit time error {time_err:.2e}"
            ),
        );
    }

    // 9
    {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut asym = 0.0f64;
        let mut dominance = 0usize;
        let mut bound_ok = true;
        for (p, run) in [(fig8, &run8), (fig9, &run9)] {
            let tmax = p.escape_bound().unwrap();
            let solver = Solver::new(p).unwrap();
            for _ in 0..200 {
                let s = random_interior(&mut rng, 1.0);
                let a = solver.solve(s).unwrap().t_star;
                let b = solver.solve(s.mirrored()).unwrap().t_star;
                asym = asym.max((a - b).abs() / tmax);
            }
            for (k, v) in run.grid.values.iter().enumerate() {
                if let (Some(v), Some(q)) = (v, run.pp.values[k]) {
                    dominance += (*v < q - 1e-6) as usize;
                    bound_ok &= *v <= tmax && *v >= 0.0;
                }
            }
        }
        r.record(
            9,
            asym < 1e-6 && dominance == 0 && descent_ok && bound_ok,
            format!(
                "mirror asymmetry {asym:.2e} T_max, dominance violations {dominance}, descent bound {}, value bound {}",
                if descent_ok { "holds" } else { "violated" },
                if bound_ok { "holds" } else { "violated" }
            ),
        );
    }

    let failed: Vec<usize> = r.lines.iter().filter(|l| !l.1).map(|l| l.0).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
