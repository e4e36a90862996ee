use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::GameParams;
use crate::scalar::Scalar;

/// Dimensionless coordinates `tau~ = omega tau`, `y0~ = (omega / v_e) y0`, `v_r = v_p / v_e`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledCoords<T> {
    pub tau_tilde: T,
    pub y0_tilde: T,
    pub v_r: T,
}

impl<T: Scalar> ScaledCoords<T> {
    pub fn from_physical(params: &GameParams<T>, tau: T, y0: T) -> Self {
        Self {
            tau_tilde: tau * params.omega_e(),
            y0_tilde: y0 * params.omega_e() / params.v_e(),
            v_r: params.speed_ratio(),
        }
    }

    /// `(tau, y0)` in physical units.
    pub fn to_physical(&self, params: &GameParams<T>) -> (T, T) {
        (self.tau_tilde / params.omega_e(), self.y0_tilde * params.v_e() / params.omega_e())
    }
}

/// Scaled `x`-crossing function of the region-B family with `u_e = -1`:
/// `(y0~ - v_r tau~) sin tau~ + 1 - cos tau~`, which equals `-(omega / v_e) x`.
pub fn gamma<T: Scalar>(v_r: T, tau_tilde: T, y0_tilde: T) -> T {
    (y0_tilde - tau_tilde * v_r) * tau_tilde.sin() + T::one() - tau_tilde.cos()
}

pub fn gamma_dtau<T: Scalar>(v_r: T, tau_tilde: T, y0_tilde: T) -> T {
    let (s, c) = tau_tilde.sin_cos();
    (y0_tilde - tau_tilde * v_r) * c + (T::one() - v_r) * s
}

/// Tangency point of the zero set of `gamma`, in scaled units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint<T> {
    pub tau_sharp: T,
    pub y0_sharp: T,
}

impl<T: Scalar> CriticalPoint<T> {
    /// Height `y0#` of the universal/dispersal split on the axis.
    pub fn y0_sharp_physical(&self, params: &GameParams<T>) -> T {
        self.y0_sharp * params.v_e() / params.omega_e()
    }

    pub fn tau_sharp_physical(&self, params: &GameParams<T>) -> T {
        self.tau_sharp / params.omega_e()
    }
}

const SCAN: usize = 200;

/// Critical point of `gamma` for the speed ratio of `params`.
///
/// Scans `[0, 2 pi) x [0, Y]` with `Y = max(omega rho / v_e, 1)` and polishes the
/// best seeds with a damped Newton iteration on `(gamma, d gamma / d tau~)`.
/// Absent for `v_r <= 1/2`.
pub fn gamma_critical<T: Scalar>(params: &GameParams<T>) -> Result<Option<CriticalPoint<T>>> {
    let y_max = (params.omega_e() * params.rho() / params.v_e()).max(T::one());
    gamma_critical_in(params.speed_ratio(), y_max)
}

/// [`gamma_critical`] from the speed ratio alone.
pub fn gamma_critical_vr<T: Scalar>(v_r: T) -> Result<Option<CriticalPoint<T>>> {
    gamma_critical_in(v_r, T::one())
}

fn residual<T: Scalar>(v_r: T, z: [T; 2]) -> [T; 2] {
    [gamma(v_r, z[0], z[1]), gamma_dtau(v_r, z[0], z[1])]
}

fn gamma_critical_in<T: Scalar>(v_r: T, y_max: T) -> Result<Option<CriticalPoint<T>>> {
    if v_r >= T::one() {
        return Err(Error::WrongRegime("critical point needs v_r < 1".into()));
    }
    if v_r <= T::c(0.5) {
        return Ok(None);
    }
    let two_pi = T::PI() + T::PI();
    let dt = two_pi / T::c(SCAN as f64);
    let dy = y_max / T::c((SCAN - 1) as f64);

    // seeds: local minima of the residual over the scan, best first
    let metric = |i: usize, j: usize| {
        let r = residual(v_r, [dt * T::c(i as f64), dy * T::c(j as f64)]);
        r[0].abs() + r[1].abs()
    };
    let grid: Vec<Vec<T>> = (0..SCAN).map(|i| (0..SCAN).map(|j| metric(i, j)).collect()).collect();
    let mut cells: Vec<(T, usize, usize)> = Vec::new();
    for i in 1..SCAN {
        for j in 0..SCAN {
            let m = grid[i][j];
            let is_min = (i.saturating_sub(1)..=(i + 1).min(SCAN - 1))
                .flat_map(|a| (j.saturating_sub(1)..=(j + 1).min(SCAN - 1)).map(move |b| (a, b)))
                .all(|(a, b)| grid[a][b] >= m);
            if is_min {
                cells.push((m, i, j));
            }
        }
    }
    cells.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));

    let tol = T::c(1e-10).max(T::epsilon() * T::c(64.0));
    let mut last_err = String::from("no seeds");
    for &(_, i, j) in cells.iter().take(64) {
        let seed = [dt * T::c(i as f64), dy * T::c(j as f64)];
        match newton(v_r, seed, tol) {
            Some(z) if z[0] > dt * T::c(0.5) && z[0] < two_pi && z[1] >= -tol && z[1] <= y_max => {
                return Ok(Some(CriticalPoint { tau_sharp: z[0], y0_sharp: z[1].max(T::zero()) }));
            }
            Some(z) => last_err = format!("seed converged outside the box to ({}, {})", z[0], z[1]),
            None => last_err = format!("Newton stalled from seed ({}, {})", seed[0], seed[1]),
        }
    }
    Err(Error::NoConvergence(format!("gamma critical point for v_r = {v_r}: {last_err}")))
}

/// Damped Newton with a forward-difference Jacobian.
fn newton<T: Scalar>(v_r: T, mut z: [T; 2], tol: T) -> Option<[T; 2]> {
    let norm = |r: [T; 2]| r[0].abs().max(r[1].abs());
    let mut r = residual(v_r, z);
    for _ in 0..100 {
        if norm(r) < tol {
            return Some(z);
        }
        let mut jac = [[T::zero(); 2]; 2];
        for k in 0..2 {
            let h = T::c(1e-7) * z[k].abs().max(T::one());
            let mut zp = z;
            zp[k] = zp[k] + h;
            let rp = residual(v_r, zp);
            jac[0][k] = (rp[0] - r[0]) / h;
            jac[1][k] = (rp[1] - r[1]) / h;
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == T::zero() || !det.is_finite() {
            return None;
        }
        let step = [
            (jac[1][1] * r[0] - jac[0][1] * r[1]) / det,
            (jac[0][0] * r[1] - jac[1][0] * r[0]) / det,
        ];
        let mut lambda = T::one();
        loop {
            let trial = [z[0] - lambda * step[0], z[1] - lambda * step[1]];
            let rt = residual(v_r, trial);
            if norm(rt) < norm(r) || lambda < T::c(1e-6) {
                z = trial;
                r = rt;
                break;
            }
            lambda = lambda * T::c(0.5);
        }
    }
    (norm(r) < tol).then_some(z)
}

/// Backward time (scaled) at which the region-B arc started at `y0~ > 0` with
/// `u_e = -1` returns to the axis: the unique root of `gamma(., y0~)` in `(0, tau~#)`.
pub fn crossing_time<T: Scalar>(params: &GameParams<T>, y0_tilde: T) -> Result<T> {
    let crit = gamma_critical(params)?
        .ok_or_else(|| Error::WrongRegime("axis re-crossing needs v_r > 1/2".into()))?;
    crossing_time_with(params.speed_ratio(), &crit, y0_tilde)
}

/// [`crossing_time`] with a precomputed critical point.
pub fn crossing_time_with<T: Scalar>(v_r: T, crit: &CriticalPoint<T>, y0_tilde: T) -> Result<T> {
    if !(y0_tilde > T::zero() && y0_tilde < crit.y0_sharp) {
        return Err(Error::OutOfRange(format!(
            "scaled height {y0_tilde} outside (0, {})",
            crit.y0_sharp
        )));
    }
    // gamma > 0 just after 0 and < 0 at tau~#; count sign changes as a diagnostic
    let n = 64;
    let mut changes = 0;
    let mut prev = T::one();
    for k in 1..=n {
        let g = gamma(v_r, crit.tau_sharp * T::c(k as f64 / n as f64), y0_tilde);
        if g.signum() != prev.signum() && g != T::zero() {
            changes += 1;
            prev = g;
        }
    }
    if changes > 1 {
        return Err(Error::NoConvergence(format!(
            "{changes} sign changes of gamma below tau# for y0~ = {y0_tilde}"
        )));
    }
    let (mut lo, mut hi) = (T::zero(), crit.tau_sharp);
    let tol = T::c(1e-12).max(T::epsilon() * T::c(4.0));
    while hi - lo > tol {
        let mid = (lo + hi) * T::c(0.5);
        if gamma(v_r, mid, y0_tilde) > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        if mid == lo && mid == hi {
            break;
        }
    }
    Ok((lo + hi) * T::c(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    // independent closed form: cos^2(tau#/2) = 1/(2 v_r), y0# = v_r tau# - tan(tau#/2)
    fn oracle(v_r: f64) -> (f64, f64) {
        let t = 2.0 * (1.0 / (2.0 * v_r)).sqrt().acos();
        (t, v_r * t - (t / 2.0).tan())
    }

    #[test]
    fn trivial_values() {
        for y in [0.0, 0.3, 1.0] {
            assert_eq!(gamma(0.6, 0.0, y), 0.0);
            assert!((gamma(0.6, PI, y) - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn threshold_behaviour() {
        assert_eq!(gamma_critical_vr(0.4f64).unwrap(), None);
        assert_eq!(gamma_critical_vr(0.5f64).unwrap(), None);
        assert_eq!(gamma_critical_vr(0.2f64).unwrap(), None);
        for v_r in [0.55, 2.0 / 3.0, 0.9] {
            let c = gamma_critical_vr::<f64>(v_r).unwrap().unwrap();
            assert!(gamma(v_r, c.tau_sharp, c.y0_sharp).abs() < 1e-10);
            assert!(gamma_dtau(v_r, c.tau_sharp, c.y0_sharp).abs() < 1e-10);
            let (t, y) = oracle(v_r);
            assert!((c.tau_sharp - t).abs() < 1e-7, "{v_r}: {} vs {t}", c.tau_sharp);
            assert!((c.y0_sharp - y).abs() < 1e-8);
        }
    }

    #[test]
    fn two_thirds_matches_known_point() {
        let c = gamma_critical_vr(2.0 / 3.0).unwrap().unwrap();
        assert!((c.tau_sharp - PI / 3.0).abs() < 1e-8);
        let p = GameParams::new(1.5, 1.0, 1.0, 1.0).unwrap();
        assert!((c.y0_sharp_physical(&p) - 1.5 * (2.0 * PI / 9.0 - (PI / 6.0).tan())).abs() < 1e-8);
    }

    #[test]
    fn sign_topology_for_two_thirds() {
        // positive lobe above the tangency, negative pocket between the root curve and tau#
        let v_r = 2.0 / 3.0;
        let (t, y) = oracle(v_r);
        assert!(gamma(v_r, t, 0.5 * y) < 0.0);
        assert!(gamma(v_r, t, 2.0 * y) > 0.0);
        assert!(gamma(v_r, 0.5 * t, 2.0 * y) > 0.0);
        let mut neg = 0;
        for i in 1..200 {
            for j in 0..200 {
                if gamma(v_r, 2.0 * PI * i as f64 / 200.0, j as f64 / 199.0 * 2.0 / 3.0) < 0.0 {
                    neg += 1;
                }
            }
        }
        assert!(neg > 0);
        let p = gamma_critical_vr(0.4).unwrap();
        assert!(p.is_none());
    }

    #[test]
    fn crossing_time_roots() {
        let p = GameParams::new(1.5, 1.0, 1.0, 1.0).unwrap();
        let c = gamma_critical(&p).unwrap().unwrap();
        for k in 1..=20 {
            let y = c.y0_sharp * k as f64 / 21.0;
            let t = crossing_time(&p, y).unwrap();
            assert!(t > 0.0 && t < c.tau_sharp);
            assert!(gamma(2.0 / 3.0, t, y).abs() < 1e-12);
        }
        let small = crossing_time(&p, 1e-9).unwrap();
        assert!(small < 1e-6);
        let near = crossing_time(&p, c.y0_sharp * (1.0 - 1e-9)).unwrap();
        assert!(c.tau_sharp - near < 1e-3);
        assert!(matches!(crossing_time(&p, c.y0_sharp * 1.1), Err(Error::OutOfRange(_))));
        let q = GameParams::new(2.0, 1.0, 1.0, 1.0).unwrap();
        assert!(matches!(crossing_time(&q, 0.01), Err(Error::WrongRegime(_))));
    }

    #[test]
    fn scaled_round_trip() {
        let p = GameParams::new(1.5, 1.0, 2.0, 1.0).unwrap();
        let s: ScaledCoords<f64> = ScaledCoords::from_physical(&p, 0.3, 0.2);
        let (t, y) = s.to_physical(&p);
        assert!((t - 0.3).abs() < 1e-15 && (y - 0.2).abs() < 1e-15);
        assert!((s.v_r - 2.0 / 3.0).abs() < 1e-15);
    }
}
