// Copyright 2026 The dfs Authors
// SPDX-License-Identifier: Apache-2.0

//! Time-local coefficients of the master equation and switch-off detection.

use crate::error::{Error, Result};
use crate::greens::{GreenTrajectory, TimeGrid};
use crate::spectral::SpectralModel;

pub const DEFAULT_U_FLOOR: f64 = 1e-12;
pub const DEFAULT_SWITCH_OFF_TOL: f64 = 1e-3;
pub const DEFAULT_SWITCH_OFF_WINDOW: f64 = 2.0;

/// Renormalized level `ε̃₊` and the rates `γ`, `γ̃`, `κ`, `κ̃` on a grid.
///
/// If `|u|` falls below the floor the series stop at the last valid node and
/// `truncated` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTrajectory {
    pub grid: TimeGrid,
    pub eps_tilde: Vec<f64>,
    pub gamma: Vec<f64>,
    pub gamma_tilde: Vec<f64>,
    pub kappa: Vec<f64>,
    pub kappa_tilde: Vec<f64>,
    pub truncated: bool,
}

impl RateTrajectory {
    pub fn len(&self) -> usize {
        self.kappa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappa.is_empty()
    }

    pub fn t(&self, k: usize) -> f64 {
        self.grid.t(k)
    }

    /// `min |κ + κ̃|` over nodes with `t > t0`, or `None` if there are none.
    pub fn min_abs_total_after(&self, t0: f64) -> Option<f64> {
        (0..self.len())
            .filter(|&k| self.t(k) > t0)
            .map(|k| (self.kappa[k] + self.kappa_tilde[k]).abs())
            .reduce(f64::min)
    }

    /// Largest node-wise deviation between two rate trajectories in `κ`, `κ̃`.
    pub fn max_kappa_diff(&self, other: &Self) -> f64 {
        let a = self.kappa.iter().zip(&other.kappa).map(|(x, y)| (x - y).abs());
        let b = self
            .kappa_tilde
            .iter()
            .zip(&other.kappa_tilde)
            .map(|(x, y)| (x - y).abs());
        a.chain(b).fold(0.0, f64::max)
    }
}

fn valid_len(traj: &GreenTrajectory, u_floor: f64) -> usize {
    traj.u.iter().position(|u| u.norm() <= u_floor).unwrap_or(traj.u.len())
}

/// Rates from `u̇u⁻¹` and `v̇`:
/// `ε̃₊ = -Im[u̇/u]`, `γ = -Re[u̇/u]`, `γ̃ = v̇ - 2v Re[u̇/u]`,
/// `κ = γ - γ̃/2`, `κ̃ = γ̃/2`.
pub fn rates_from_uv(traj: &GreenTrajectory) -> RateTrajectory {
    rates_from_uv_with(traj, DEFAULT_U_FLOOR)
}

pub fn rates_from_uv_with(traj: &GreenTrajectory, u_floor: f64) -> RateTrajectory {
    let n = valid_len(traj, u_floor);
    let mut out = empty(traj, n);
    for k in 0..n {
        let r = traj.u_dot[k] / traj.u[k];
        let gamma = -r.re;
        let gamma_tilde = traj.v_dot[k] - 2.0 * traj.v[k] * r.re;
        out.eps_tilde.push(-r.im);
        out.gamma.push(gamma);
        out.gamma_tilde.push(gamma_tilde);
        out.kappa.push(gamma - 0.5 * gamma_tilde);
        out.kappa_tilde.push(0.5 * gamma_tilde);
    }
    out
}

/// Rates from the total-derivative forms
/// `κ = (|u|²/2) d/dt[(1-v)/|u|²]`, `κ̃ = (|u|²/2) d/dt[v/|u|²]`,
/// expanded with the stored derivatives.
pub fn rates_simplified(traj: &GreenTrajectory) -> RateTrajectory {
    rates_simplified_with(traj, DEFAULT_U_FLOOR)
}

pub fn rates_simplified_with(traj: &GreenTrajectory, u_floor: f64) -> RateTrajectory {
    let n = valid_len(traj, u_floor);
    let mut out = empty(traj, n);
    for k in 0..n {
        let (u, ud, v, vd) = (traj.u[k], traj.u_dot[k], traj.v[k], traj.v_dot[k]);
        let n2 = u.norm_sqr();
        let dn2 = 2.0 * (u.conj() * ud).re;
        let kappa = 0.5 * n2 * (-vd / n2 - (1.0 - v) * dn2 / (n2 * n2));
        let kappa_tilde = 0.5 * n2 * (vd / n2 - v * dn2 / (n2 * n2));
        out.eps_tilde.push(-(u.conj() * ud).im / n2);
        out.gamma.push(kappa + kappa_tilde);
        out.gamma_tilde.push(2.0 * kappa_tilde);
        out.kappa.push(kappa);
        out.kappa_tilde.push(kappa_tilde);
    }
    out
}

fn empty(traj: &GreenTrajectory, n: usize) -> RateTrajectory {
    RateTrajectory {
        grid: traj.grid,
        eps_tilde: Vec::with_capacity(n),
        gamma: Vec::with_capacity(n),
        gamma_tilde: Vec::with_capacity(n),
        kappa: Vec::with_capacity(n),
        kappa_tilde: Vec::with_capacity(n),
        truncated: n < traj.u.len(),
    }
}

/// Born–Markov constants `(κ_BM, κ̃_BM) = (J(1-f)/2, Jf/2)` at the level.
pub fn bm_rates(model: &SpectralModel) -> (f64, f64) {
    let j = model.j_at_level();
    let f = model.fermi(model.center);
    (0.5 * j * (1.0 - f), 0.5 * j * f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwitchOff {
    KappaOff,
    KappaTildeOff,
    NeitherOff,
    BothOff,
}

impl SwitchOff {
    pub fn as_str(&self) -> &'static str {
        match self {
            SwitchOff::KappaOff => "KappaOff",
            SwitchOff::KappaTildeOff => "KappaTildeOff",
            SwitchOff::NeitherOff => "NeitherOff",
            SwitchOff::BothOff => "BothOff",
        }
    }
}

impl std::fmt::Display for SwitchOff {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchOffReport {
    pub which: SwitchOff,
    pub t_s: Option<f64>,
    pub window: f64,
    pub tolerance: f64,
}

/// Earliest node after which `|r| < tol` through to the end of the series,
/// provided that stretch spans at least `window_nodes`.
fn settle_index(r: &[f64], tol: f64, window_nodes: usize) -> Option<usize> {
    let start = r
        .iter()
        .rposition(|x| x.abs() >= tol || !x.is_finite())
        .map_or(0, |k| k + 1);
    (r.len() > start && r.len() - 1 - start >= window_nodes).then_some(start)
}

/// Classify which decoherence rate, if any, has switched off.
pub fn detect_switch_off(rates: &RateTrajectory, tolerance: f64, window: f64) -> Result<SwitchOffReport> {
    if !(tolerance > 0.0 && window >= 0.0) {
        return Err(Error::Config(format!(
            "switch-off needs tolerance > 0 and window ≥ 0, got {tolerance}, {window}"
        )));
    }
    let window_nodes = (window / rates.grid.dt - 1e-9).ceil().max(0.0) as usize;
    if rates.len() <= window_nodes {
        return Err(Error::SeriesTooShort {
            len: rates.len(),
            window: window_nodes,
        });
    }
    let k = settle_index(&rates.kappa, tolerance, window_nodes);
    let kt = settle_index(&rates.kappa_tilde, tolerance, window_nodes);
    let (which, idx) = match (k, kt) {
        (Some(a), Some(b)) => (SwitchOff::BothOff, Some(a.max(b))),
        (Some(a), None) => (SwitchOff::KappaOff, Some(a)),
        (None, Some(b)) => (SwitchOff::KappaTildeOff, Some(b)),
        (None, None) => (SwitchOff::NeitherOff, None),
    };
    Ok(SwitchOffReport {
        which,
        t_s: idx.map(|i| rates.t(i)),
        window,
        tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::solve_green;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn run(d: f64, mu: f64, horizon: f64) -> (GreenTrajectory, RateTrajectory) {
        let m = SpectralModel::lorentzian(1.0, d, 0.2, mu, 0.3).unwrap();
        let grid = TimeGrid::from_horizon(1e-3, horizon).unwrap();
        let g = solve_green(&m, &grid).unwrap();
        let r = rates_from_uv(&g);
        (g, r)
    }

    #[test]
    fn decoupled_rates_vanish() {
        let m = SpectralModel::lorentzian(0.0, 1.0, 0.2, 10.0, 0.3).unwrap();
        let grid = TimeGrid::from_horizon(1e-2, 5.0).unwrap();
        let r = rates_from_uv(&solve_green(&m, &grid).unwrap());
        assert!(r.gamma.iter().chain(&r.gamma_tilde).all(|x| x.abs() < 1e-15));
        assert!(r.eps_tilde.iter().all(|e| (e - 0.2).abs() < 1e-14));
        let rep = detect_switch_off(&r, DEFAULT_SWITCH_OFF_TOL, DEFAULT_SWITCH_OFF_WINDOW).unwrap();
        assert_eq!(rep.which, SwitchOff::BothOff);
        assert_eq!(rep.t_s, Some(0.0));
    }

    #[test]
    fn initial_rates() {
        let (_, r) = run(2.0, 0.0, 1.0);
        assert_abs_diff_eq!(r.gamma[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.eps_tilde[0], 0.2, epsilon = 1e-15);
    }

    #[test]
    fn kappa_peaks_then_decays_when_reservoir_full() {
        let (_, r) = run(10.0, 10.0, 10.0);
        let early = r.kappa[..1000].iter().cloned().fold(f64::MIN, f64::max);
        assert!(early > 0.04, "early peak {early}");
        let late = r.kappa[6000..].iter().map(|x| x.abs()).fold(0.0, f64::max);
        assert!(late < 3e-3, "late |κ| {late}");
        assert!(r.kappa_tilde[9000..].iter().all(|&x| x > 0.4));
        // κ settles near 2e-3, above the default tolerance.
        let loose = detect_switch_off(&r, 5e-3, 2.0).unwrap();
        assert_eq!(loose.which, SwitchOff::KappaOff);
        assert!(loose.t_s.unwrap() < 6.0);
        let strict = detect_switch_off(&r, 1e-3, 2.0).unwrap();
        assert_eq!(strict.which, SwitchOff::NeitherOff);
    }

    #[test]
    fn simplified_forms_agree() {
        for (d, mu) in [(10.0, 10.0), (0.5, 0.0), (2.0, -10.0)] {
            let (g, r) = run(d, mu, 6.0);
            let s = rates_simplified(&g);
            assert_eq!(s.len(), r.len());
            let mut worst: f64 = 0.0;
            for k in 0..r.len() {
                // Relative near poles of 1/|u|².
                let scale = 1.0f64.max(r.kappa[k].abs()).max(r.kappa_tilde[k].abs());
                worst = worst.max((r.kappa[k] - s.kappa[k]).abs() / scale);
                worst = worst.max((r.kappa_tilde[k] - s.kappa_tilde[k]).abs() / scale);
            }
            assert!(worst < 1e-8, "d={d} μ={mu}: {worst:e}");
        }
    }

    #[test]
    fn identity_kappa_sum_is_gamma() {
        let (_, r) = run(0.5, 2.0, 4.0);
        for k in 0..r.len() {
            assert_abs_diff_eq!(r.kappa[k] + r.kappa_tilde[k], r.gamma[k], epsilon = 1e-12);
        }
    }

    #[test]
    fn strong_memory_gain_rate_changes_sign() {
        let (_, r) = run(0.5, 0.0, 10.0);
        let flips = r
            .kappa_tilde
            .windows(2)
            .filter(|w| w[0].signum() != w[1].signum())
            .count();
        assert!(flips >= 1);
    }

    fn synthetic(v: f64, u_abs: f64) -> GreenTrajectory {
        let grid = TimeGrid::new(0.1, 30).unwrap();
        let u = vec![Complex64::new(u_abs, 0.0); grid.len()];
        GreenTrajectory {
            grid,
            u_dot: vec![Complex64::new(0.0, -0.2 * u_abs); grid.len()],
            u,
            v: vec![v; grid.len()],
            v_dot: vec![0.0; grid.len()],
            audit: Default::default(),
        }
    }

    #[test]
    fn stationary_occupations_switch_rates_off() {
        let full = rates_simplified(&synthetic(1.0, 0.3));
        assert!(full.kappa.iter().all(|&k| k == 0.0));
        let empty = rates_simplified(&synthetic(0.0, 0.3));
        assert!(empty.kappa_tilde.iter().all(|&k| k == 0.0));
    }

    #[test]
    fn floor_truncates() {
        let mut g = synthetic(0.5, 0.3);
        g.u[20] = Complex64::new(1e-13, 0.0);
        let r = rates_from_uv(&g);
        assert!(r.truncated);
        assert_eq!(r.len(), 20);
    }

    #[test]
    fn short_series_rejected() {
        let r = rates_from_uv(&synthetic(0.5, 0.3));
        assert_eq!(
            detect_switch_off(&r, 1e-3, 5.0),
            Err(Error::SeriesTooShort { len: 31, window: 50 })
        );
    }

    #[test]
    fn bm_constants() {
        let wb = SpectralModel::wide_band(1.0, 0.2, 10.0, 0.3).unwrap();
        let (k, kt) = bm_rates(&wb);
        assert_abs_diff_eq!(k, 3.2e-15, epsilon = 1e-16);
        assert_abs_diff_eq!(kt, 0.5, epsilon = 1e-14);
        let sym = SpectralModel::lorentzian(1.0, 3.0, 0.2, 0.2, 0.3).unwrap();
        let (k, kt) = bm_rates(&sym);
        assert_eq!((k, kt), (0.25, 0.25));
        let any = SpectralModel::lorentzian(0.7, 3.0, 0.2, 1.3, 0.3).unwrap();
        let (k, kt) = bm_rates(&any);
        assert_abs_diff_eq!(k + kt, 0.35, epsilon = 1e-15);
    }
}
