//! `prying`: command-line front end for the prying pedestrian game solver.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use prying_core::kind::{classify, KindOutcome, KindTag};
use prying_core::model::{
    to_inertial, write_inertial_csv, write_relative_csv, Controls, Direction, EvaderPose, GameParams,
    RelState, TimedTrajectory, TrajectorySample,
};
use prying_core::solver::{
    dp_oracle, forward_verify, optimal_controls, pure_pursuit_grid, value_grid, DpOptions, Solver,
    ValueGrid,
};
use prying_core::synthesis::{gamma, gamma_critical, gamma_critical_vr, Characteristic};
use prying_core::Error;

#[derive(Debug, Parser)]
#[command(name = "prying", version, about = "Surveillance-evasion game solver")]
struct Cli {
    /// Evader speed.
    #[arg(long, global = true, allow_negative_numbers = true, default_value_t = 2.0)]
    ve: f64,
    /// Pursuer speed.
    #[arg(long, global = true, allow_negative_numbers = true, default_value_t = 1.0)]
    vp: f64,
    /// Evader maximum turn rate.
    #[arg(long, global = true, allow_negative_numbers = true, default_value_t = 1.0)]
    we: f64,
    /// Surveillance radius.
    #[arg(long, global = true, allow_negative_numbers = true, default_value_t = 1.0)]
    rho: f64,
    /// Worker threads for grid sweeps.
    #[arg(long, global = true, env = "PP_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FanRegion {
    A,
    B,
    C,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Against {
    /// Pure pursuit against the Nash evader.
    Pp,
    /// Grid dynamic-programming oracle.
    Dp,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Game of kind: who wins and the straight-line escape bound.
    Kind {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Value and Nash play from one state.
    Solve {
        #[arg(long, allow_negative_numbers = true)]
        x0: f64,
        #[arg(long, allow_negative_numbers = true)]
        y0: f64,
        /// `.json` for the report, `.csv` for the trajectory; report on stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One CSV per characteristic of a family, in backward time.
    Fan {
        #[arg(long, value_enum, ignore_case = true)]
        region: FanRegion,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long)]
        out_dir: PathBuf,
        /// Also write the mirror image (`u_e = +1` side) of every arc.
        #[arg(long)]
        mirror: bool,
    },
    /// Value of the game on a square grid.
    Grid {
        #[arg(long, default_value_t = 201)]
        res: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Escape times against a pure-pursuit pursuer.
    PpGrid {
        #[arg(long, default_value_t = 201)]
        res: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Value grid next to a second grid and their difference.
    Compare {
        #[arg(long, default_value_t = 201)]
        res: usize,
        #[arg(long, value_enum, ignore_case = true, default_value_t = Against::Pp)]
        against: Against,
        /// Pursuer headings of the oracle.
        #[arg(long, default_value_t = 64)]
        headings: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Gamma function on the scaled box, with its critical point.
    GammaContour {
        #[arg(long)]
        vr: f64,
        #[arg(long, default_value_t = 201)]
        res: usize,
        /// Upper end of the scaled height axis; `we * rho / ve` if absent.
        #[arg(long)]
        ymax: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Integrate the Nash controls from one state.
    Replay {
        #[arg(long, allow_negative_numbers = true)]
        x0: f64,
        #[arg(long, allow_negative_numbers = true)]
        y0: f64,
        /// Write inertial positions instead of the relative state.
        #[arg(long)]
        inertial: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Validation(String, Option<KindOutcome>),
    Compute(String),
}

impl Failure {
    fn to_json(&self) -> Value {
        match self {
            Failure::Usage(m) => json!({"error": "Usage", "message": m}),
            Failure::Validation(m, Some(k)) => json!({"error": "Validation", "message": m, "kind": k}),
            Failure::Validation(m, None) => json!({"error": "Validation", "message": m}),
            Failure::Compute(m) => json!({"error": "Compute", "message": m}),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_) | Error::OutsideGameSet | Error::OutOfRange(_) => {
                Failure::Validation(e.to_string(), None)
            }
            Error::DegenerateGame(k) => Failure::Validation(Error::DegenerateGame(k.clone()).to_string(), Some(k)),
            _ => Failure::Compute(e.to_string()),
        }
    }
}

fn io_fail(path: &Path, e: std::io::Error) -> Failure {
    Failure::Validation(format!("{}: {e}", path.display()), None)
}

type Res<T> = std::result::Result<T, Failure>;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Format {
    Csv,
    Json,
}

fn format_of(path: &Path) -> Res<Format> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => Ok(Format::Csv),
        Some("json") => Ok(Format::Json),
        _ => Err(Failure::Validation(format!("{}: extension must be .csv or .json", path.display()), None)),
    }
}

/// Opens the output before any computation so unwritable paths fail fast.
fn open(path: &Path) -> Res<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| io_fail(path, e))
}

fn write_json<W: Write, S: serde::Serialize + ?Sized>(mut w: W, v: &S) -> Res<()> {
    serde_json::to_writer(&mut w, v).map_err(|e| Failure::Compute(e.to_string()))?;
    writeln!(w).map_err(|e| Failure::Compute(e.to_string()))?;
    w.flush().map_err(|e| Failure::Compute(e.to_string()))
}

fn degree_params(p: &GameParams<f64>) -> Res<()> {
    let k = classify(p);
    if k.tag == KindTag::PursuerContains {
        return Err(Failure::Validation("game of degree needs v_p < v_e".into(), Some(k)));
    }
    Ok(())
}

fn write_grid(path: &Path, fmt: Format, w: BufWriter<File>, g: &ValueGrid) -> Res<()> {
    match fmt {
        Format::Csv => g.write_csv(w).map_err(Failure::from),
        Format::Json => write_json(w, &g.to_json()),
    }
    .map_err(|e| match e {
        Failure::Compute(m) => Failure::Compute(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn run(cli: Cli) -> Res<()> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(Failure::Validation("--jobs must be positive".into(), None));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Compute(e.to_string()))?;
    }
    let p = GameParams::new(cli.ve, cli.vp, cli.we, cli.rho)?;
    match cli.command {
        Command::Kind { out } => {
            let v = classify(&p);
            match out {
                Some(path) => {
                    format_of(&path)?;
                    write_json(open(&path)?, &v)
                }
                None => write_json(std::io::stdout().lock(), &v),
            }
        }
        Command::Solve { x0, y0, out } => {
            degree_params(&p)?;
            let target = match &out {
                Some(path) => Some((format_of(path)?, open(path)?)),
                None => None,
            };
            let sol = Solver::new(p)?.solve(RelState::new(x0, y0))?;
            let report = sol.report();
            match target {
                Some((Format::Csv, w)) => Ok(write_relative_csv(w, &sol.trajectory)?),
                Some((Format::Json, w)) => write_json(w, &report),
                None => write_json(std::io::stdout().lock(), &report),
            }
        }
        Command::Fan { region, count, out_dir, mirror } => {
            degree_params(&p)?;
            std::fs::create_dir_all(&out_dir).map_err(|e| io_fail(&out_dir, e))?;
            fan(&p, region, count, &out_dir, mirror)
        }
        Command::Grid { res, out } => {
            degree_params(&p)?;
            let fmt = format_of(&out)?;
            let w = open(&out)?;
            let g = value_grid(&p, res)?;
            write_grid(&out, fmt, w, &g)
        }
        Command::PpGrid { res, out } => {
            degree_params(&p)?;
            let fmt = format_of(&out)?;
            let w = open(&out)?;
            let g = pure_pursuit_grid(&p, res)?;
            write_grid(&out, fmt, w, &g)
        }
        Command::Compare { res, against, headings, out } => {
            degree_params(&p)?;
            let fmt = format_of(&out)?;
            let w = open(&out)?;
            let opt = value_grid(&p, res)?;
            let other = match against {
                Against::Pp => pure_pursuit_grid(&p, res)?,
                Against::Dp => {
                    dp_oracle(&p, &DpOptions { resolution: res, n_headings: headings, ..DpOptions::default() })?
                }
            };
            let diff = opt.difference(&other)?;
            write_compare(w, fmt, &opt, &other, &diff)
        }
        Command::GammaContour { vr, res, ymax, out } => {
            if !(vr > 0.0 && vr < 1.0) {
                return Err(Failure::Validation(format!("--vr must lie in (0, 1), got {vr}"), None));
            }
            if res < 2 {
                return Err(Failure::Validation("--res must be at least 2".into(), None));
            }
            let fmt = format_of(&out)?;
            let w = open(&out)?;
            let ymax = ymax.unwrap_or(p.omega_e() * p.rho() / p.v_e());
            gamma_contour(w, fmt, vr, res, ymax)
        }
        Command::Replay { x0, y0, inertial, out } => {
            degree_params(&p)?;
            if format_of(&out)? != Format::Csv {
                return Err(Failure::Validation("replay writes .csv".into(), None));
            }
            let w = open(&out)?;
            let sol = Solver::new(p)?.solve(RelState::new(x0, y0))?;
            let rep = forward_verify(&p, &sol)?;
            if inertial {
                let path = to_inertial(&p, &rep.trajectory, &optimal_controls(&sol), EvaderPose::default())?;
                Ok(write_inertial_csv(w, &path)?)
            } else {
                Ok(write_relative_csv(w, &rep.trajectory)?)
            }
        }
    }
}

const FAN_SAMPLES: usize = 200;

fn fan(p: &GameParams<f64>, region: FanRegion, count: usize, dir: &Path, mirror: bool) -> Res<()> {
    if count == 0 {
        return Err(Failure::Validation("--count must be positive".into(), None));
    }
    let mid = |k: usize| (k as f64 + 0.5) / count as f64;
    let arcs: Vec<Characteristic<f64>> = match region {
        FanRegion::A => {
            let lo = (-p.speed_ratio()).acos();
            (0..count)
                .map(|k| Characteristic::region_a(p, lo + (std::f64::consts::PI - lo) * mid(k)))
                .collect::<Result<_, _>>()?
        }
        FanRegion::B => (0..count)
            .map(|k| Characteristic::region_b(p, -p.rho() * mid(k), -1.0))
            .collect::<Result<_, _>>()?,
        FanRegion::C => {
            let crit = gamma_critical(p)?.ok_or_else(|| {
                Failure::Validation(format!("region C is absent for v_p/v_e = {}", p.speed_ratio()), None)
            })?;
            let ys = crit.y0_sharp_physical(p);
            (0..count)
                .map(|k| Characteristic::region_c(p, &crit, ys * mid(k), -1.0))
                .collect::<Result<_, _>>()?
        }
    };
    let tag = format!("{region:?}");
    for (k, ch) in arcs.iter().enumerate() {
        let mut tr = TimedTrajectory::new(Direction::Backward);
        for i in 0..=FAN_SAMPLES {
            let s = ch.span() * i as f64 / FAN_SAMPLES as f64;
            let pt = ch.at(p, s);
            tr.samples.push(TrajectorySample { t: s, state: pt.state, controls: pt.controls });
        }
        let path = dir.join(format!("fan_{tag}_{k:03}.csv"));
        write_relative_csv(open(&path)?, &tr)?;
        if mirror {
            for smp in &mut tr.samples {
                smp.state = smp.state.mirrored();
                smp.controls = Controls::new(-smp.controls.u_e, -smp.controls.u_p);
            }
            let path = dir.join(format!("fan_{tag}_{k:03}_mirror.csv"));
            write_relative_csv(open(&path)?, &tr)?;
        }
    }
    Ok(())
}

fn write_compare<W: Write>(w: W, fmt: Format, opt: &ValueGrid, other: &ValueGrid, diff: &ValueGrid) -> Res<()> {
    match fmt {
        Format::Json => write_json(
            w,
            &json!({"optimal": opt.to_json(), "other": other.to_json(), "difference": diff.to_json()}),
        ),
        Format::Csv => {
            let mut w = w;
            let mut line = |s: String| writeln!(w, "{s}").map_err(|e| Failure::Compute(e.to_string()));
            line("x,y,optimal,other,difference,region".into())?;
            let n = opt.resolution;
            let cell = |v: Option<f64>| v.map_or("-1".to_string(), |v| format!("{v}"));
            for j in 0..n {
                for i in 0..n {
                    let k = opt.index(i, j);
                    line(format!(
                        "{},{},{},{},{},{}",
                        opt.coord(i),
                        opt.coord(j),
                        cell(opt.values[k]),
                        cell(other.values[k]),
                        cell(diff.values[k]),
                        opt.regions[k].map_or("", |r| r.label())
                    ))?;
                }
            }
            w.flush().map_err(|e| Failure::Compute(e.to_string()))
        }
    }
}

fn gamma_contour<W: Write>(w: W, fmt: Format, vr: f64, res: usize, ymax: f64) -> Res<()> {
    let crit = gamma_critical_vr(vr)?;
    let tau = |i: usize| std::f64::consts::TAU * i as f64 / res as f64;
    let y = |j: usize| ymax * j as f64 / (res - 1) as f64;
    match fmt {
        Format::Json => {
            let values: Vec<Vec<f64>> = (0..res).map(|j| (0..res).map(|i| gamma(vr, tau(i), y(j))).collect()).collect();
            let crit = crit.map(|c| json!({"tau_sharp": c.tau_sharp, "y0_sharp": c.y0_sharp}));
            write_json(
                w,
                &json!({
                    "v_r": vr,
                    "tau_tilde": (0..res).map(tau).collect::<Vec<_>>(),
                    "y0_tilde": (0..res).map(y).collect::<Vec<_>>(),
                    "gamma": values,
                    "critical": crit,
                }),
            )
        }
        Format::Csv => {
            let mut w = w;
            let mut line = |s: String| writeln!(w, "{s}").map_err(|e| Failure::Compute(e.to_string()));
            line("tau_tilde,y0_tilde,gamma".into())?;
            for j in 0..res {
                for i in 0..res {
                    line(format!("{},{},{}", tau(i), y(j), gamma(vr, tau(i), y(j))))?;
                }
            }
            if let Some(c) = crit {
                eprintln!("{}", json!({"tau_sharp": c.tau_sharp, "y0_sharp": c.y0_sharp}));
            }
            w.flush().map_err(|e| Failure::Compute(e.to_string()))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            eprintln!("{}", Failure::Usage(first).to_json());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(2)
        }
    }
}
