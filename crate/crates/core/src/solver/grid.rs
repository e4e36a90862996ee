use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::invert::{Hint, Located, Solver};
use super::pursuit::PurePursuit;
use crate::error::{Error, Result};
use crate::model::{GameParams, RelState};
use crate::synthesis::Region;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CellRegion {
    A,
    B,
    C,
    Axis,
    /// Cell of a pure-pursuit grid.
    Pursuit,
    /// Cell of a dynamic-programming grid.
    Dp,
}

impl CellRegion {
    pub fn label(&self) -> &'static str {
        match self {
            CellRegion::A => "A",
            CellRegion::B => "B",
            CellRegion::C => "C",
            CellRegion::Axis => "Axis",
            CellRegion::Pursuit => "PP",
            CellRegion::Dp => "DP",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellFailure {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub y: f64,
    pub error: String,
}

/// Values on the `resolution x resolution` lattice over `[-rho, rho]^2`.
///
/// Cells are stored row by row (`y` outer, `x` inner). Cells outside the disk,
/// and cells whose solve failed, hold `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueGrid {
    pub resolution: usize,
    pub rho: f64,
    pub values: Vec<Option<f64>>,
    pub regions: Vec<Option<CellRegion>>,
    pub failures: Vec<CellFailure>,
}

/// Sentinel written to CSV for cells without a value.
pub const SENTINEL: f64 = -1.0;

impl ValueGrid {
    pub fn empty(resolution: usize, rho: f64) -> Self {
        let n = resolution * resolution;
        Self { resolution, rho, values: vec![None; n], regions: vec![None; n], failures: Vec::new() }
    }

    pub fn coord(&self, k: usize) -> f64 {
        -self.rho + 2.0 * self.rho * k as f64 / (self.resolution - 1) as f64
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.resolution + i
    }

    pub fn value(&self, i: usize, j: usize) -> Option<f64> {
        self.values[self.index(i, j)]
    }

    pub fn state(&self, i: usize, j: usize) -> RelState<f64> {
        RelState::new(self.coord(i), self.coord(j))
    }

    pub fn is_inside(&self, i: usize, j: usize) -> bool {
        self.state(i, j).range() <= self.rho * (1.0 + 1e-12)
    }

    /// Inside the disk and not on its boundary ring of cells.
    pub fn is_interior(&self, i: usize, j: usize) -> bool {
        let h = 2.0 * self.rho / (self.resolution - 1) as f64;
        self.state(i, j).range() < self.rho - h
    }

    pub fn max_value(&self) -> Option<f64> {
        self.values.iter().flatten().copied().reduce(f64::max)
    }

    /// Largest `|V(x, y) - V(-x, y)|` over cells where both exist.
    pub fn mirror_asymmetry(&self) -> f64 {
        let n = self.resolution;
        let mut m: f64 = 0.0;
        for j in 0..n {
            for i in 0..n {
                if let (Some(a), Some(b)) = (self.value(i, j), self.value(n - 1 - i, j)) {
                    m = m.max((a - b).abs());
                }
            }
        }
        m
    }

    /// Cellwise `self - other` where both exist.
    pub fn difference(&self, other: &ValueGrid) -> Result<ValueGrid> {
        if self.resolution != other.resolution || self.rho != other.rho {
            return Err(Error::InvalidParams("grids differ in shape".into()));
        }
        let mut out = ValueGrid::empty(self.resolution, self.rho);
        for k in 0..self.values.len() {
            if let (Some(a), Some(b)) = (self.values[k], other.values[k]) {
                out.values[k] = Some(a - b);
                out.regions[k] = self.regions[k];
            }
        }
        Ok(out)
    }

    /// `x,y,value,region` rows; missing values are written as `-1` with an
    /// empty region.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let e = |e: csv::Error| Error::Io(e.to_string());
        out.write_record(["x", "y", "value", "region"]).map_err(e)?;
        for j in 0..self.resolution {
            for i in 0..self.resolution {
                let k = self.index(i, j);
                let v = self.values[k].unwrap_or(SENTINEL);
                let r = self.regions[k].map_or("", |r| r.label());
                out.write_record([format!("{}", self.coord(i)), format!("{}", self.coord(j)), format!("{v}"), r.to_string()])
                    .map_err(e)?;
            }
        }
        out.flush()?;
        Ok(())
    }

    /// JSON object with axis coordinates and row-major `values` (null outside).
    pub fn to_json(&self) -> serde_json::Value {
        let n = self.resolution;
        let axis: Vec<f64> = (0..n).map(|k| self.coord(k)).collect();
        let rows: Vec<Vec<Option<f64>>> = (0..n).map(|j| (0..n).map(|i| self.value(i, j)).collect()).collect();
        let regions: Vec<Vec<Option<&str>>> = (0..n)
            .map(|j| (0..n).map(|i| self.regions[self.index(i, j)].map(|r| r.label())).collect())
            .collect();
        serde_json::json!({
            "resolution": n,
            "rho": self.rho,
            "x": axis,
            "y": axis,
            "values": rows,
            "regions": regions,
            "failures": self.failures,
        })
    }
}

fn check_resolution(resolution: usize) -> Result<()> {
    if resolution < 3 || resolution % 2 == 0 {
        return Err(Error::InvalidParams(format!("resolution must be odd and >= 3, got {resolution}")));
    }
    Ok(())
}

type CellResult = (usize, std::result::Result<(f64, CellRegion), String>);

/// Fills the `x >= 0` half row by row and mirrors it.
fn half_sweep<F>(resolution: usize, rho: f64, row: F) -> ValueGrid
where
    F: Fn(&ValueGrid, usize) -> Vec<CellResult> + Sync,
{
    let mut grid = ValueGrid::empty(resolution, rho);
    let rows: Vec<(usize, Vec<CellResult>)> =
        (0..resolution).into_par_iter().map(|j| (j, row(&grid, j))).collect();
    let n = resolution;
    for (j, cells) in rows {
        for (i, res) in cells {
            match res {
                Ok((v, r)) => {
                    for ii in [i, n - 1 - i] {
                        let k = grid.index(ii, j);
                        grid.values[k] = Some(v);
                        grid.regions[k] = Some(r);
                    }
                }
                Err(msg) => {
                    for ii in [i, n - 1 - i] {
                        let s = grid.state(ii, j);
                        grid.failures.push(CellFailure { i: ii, j, x: s.x, y: s.y, error: msg.clone() });
                    }
                }
            }
        }
    }
    grid.failures.sort_by_key(|f| (f.j, f.i));
    grid.failures.dedup();
    grid
}

fn cell_region(loc: &Located) -> CellRegion {
    match loc {
        Located::Axis { .. } => CellRegion::Axis,
        Located::Arc { ch, .. } => match ch.region {
            Region::A => CellRegion::A,
            Region::B => CellRegion::B,
            Region::C => CellRegion::C,
        },
    }
}

/// Value of the game of degree on a grid; see [`Solver`].
///
/// Rows are swept in parallel on the current rayon pool. Within a row the
/// previous cell's root seeds the next one.
pub fn value_grid(params: &GameParams<f64>, resolution: usize) -> Result<ValueGrid> {
    check_resolution(resolution)?;
    let solver = Solver::new(*params)?;
    let mid = resolution / 2;
    Ok(half_sweep(resolution, params.rho(), |g, j| {
        let mut hint: Option<Hint> = None;
        let mut out = Vec::new();
        for i in mid..resolution {
            if !g.is_inside(i, j) {
                continue;
            }
            let s = g.state(i, j);
            let s = if i == mid { RelState::new(0.0, s.y) } else { s };
            match solver.locate(&s, hint.as_ref()) {
                Ok(loc) => {
                    hint = Solver::hint_for(&loc).or(hint);
                    out.push((i, Ok((loc.value(), cell_region(&loc)))));
                }
                Err(e) => out.push((i, Err(e.to_string()))),
            }
        }
        out
    }))
}

/// Escape times when the pursuer plays pure pursuit against the Nash evader.
pub fn pure_pursuit_grid(params: &GameParams<f64>, resolution: usize) -> Result<ValueGrid> {
    check_resolution(resolution)?;
    let pp = PurePursuit::new(*params)?;
    let mid = resolution / 2;
    Ok(half_sweep(resolution, params.rho(), |g, j| {
        (mid..resolution)
            .filter(|&i| g.is_inside(i, j))
            .map(|i| {
                let s = g.state(i, j);
                let s = if i == mid { RelState::new(0.0, s.y) } else { s };
                (i, pp.time(s).map(|v| (v, CellRegion::Pursuit)).map_err(|e| e.to_string()))
            })
            .collect()
    }))
}
