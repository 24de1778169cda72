// Copyright 2026 The dfs Authors
// SPDX-License-Identifier: Apache-2.0

//! Density-matrix evolution: the closed-form solution map in terms of `u`,
//! `v`, and direct integration of the time-local master equation.

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::greens::{GreenTrajectory, TimeGrid};
use crate::liouville::{build_lt, DensityVector};
use crate::rates::RateTrajectory;

const INITIAL_STATE_TOL: f64 = 1e-9;

/// Relation between the original single-particle levels `|1⟩`, `|2⟩` and
/// the coupled/decoupled combinations
/// `|+⟩ = (|1⟩ + e^{-iφ}|2⟩)/√2`, `|-⟩ = (-e^{iφ}|1⟩ + |2⟩)/√2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateBasis {
    pub phi: f64,
}

impl StateBasis {
    pub fn new(phi: f64) -> Self {
        Self { phi }
    }

    /// Columns are `|+⟩`, `|-⟩` in the `{|1⟩, |2⟩}` basis.
    pub fn matrix(&self) -> Matrix2<Complex64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let e = Complex64::from_polar(1.0, self.phi);
        Matrix2::new(Complex64::new(s, 0.0), -e * s, e.conj() * s, Complex64::new(s, 0.0))
    }

    /// Amplitudes on `|1⟩, |2⟩` of `α|+⟩ + β|-⟩`.
    pub fn to_original(&self, alpha: Complex64, beta: Complex64) -> (Complex64, Complex64) {
        let v = self.matrix() * nalgebra::Vector2::new(alpha, beta);
        (v[0], v[1])
    }

    /// Amplitudes on `|+⟩, |-⟩` of `c₁|1⟩ + c₂|2⟩`.
    pub fn from_original(&self, c1: Complex64, c2: Complex64) -> (Complex64, Complex64) {
        let v = self.matrix().adjoint() * nalgebra::Vector2::new(c1, c2);
        (v[0], v[1])
    }

    /// Single-particle block of `ρ` in the original basis.
    pub fn single_particle_block(&self, rho: &DensityVector) -> Matrix2<Complex64> {
        let block = Matrix2::new(rho.0[1], rho.0[2], rho.0[3], rho.0[4]);
        let u = self.matrix();
        u * block * u.adjoint()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ExactMap,
    DirectOde,
}

#[derive(Debug, Clone)]
pub struct PropagationResult {
    pub grid: TimeGrid,
    pub states: Vec<DensityVector>,
    pub method: Method,
    /// `max |Tr ρ(t) - 1|`.
    pub trace_drift: f64,
    /// Smallest eigenvalue of `ρ(t)` along the trajectory.
    pub positivity_margin: f64,
    /// Set when the rate series ended before the grid did.
    pub truncated: bool,
}

impl PropagationResult {
    fn new(grid: TimeGrid, states: Vec<DensityVector>, method: Method, truncated: bool) -> Self {
        let trace_drift = states.iter().map(|r| (r.trace() - 1.0).norm()).fold(0.0, f64::max);
        let positivity_margin = states.iter().map(|r| r.min_eigenvalue()).fold(f64::INFINITY, f64::min);
        Self {
            grid,
            states,
            method,
            trace_drift,
            positivity_margin,
            truncated,
        }
    }

    pub fn last(&self) -> &DensityVector {
        self.states.last().expect("propagation has at least one state")
    }

    /// Element-wise max difference over the common prefix of two results.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }
}

/// One application of the solution map at a single time.
pub fn exact_map(rho0: &DensityVector, u: Complex64, v: f64, eps_minus: f64, t: f64) -> DensityVector {
    let n2 = u.norm_sqr();
    let (a, b, c, d) = (rho0.0[0], rho0.0[1], rho0.0[4], rho0.0[5]);
    let coh = u * Complex64::from_polar(1.0, eps_minus * t);
    DensityVector([
        (1.0 - v) * a + (1.0 - v - n2) * b,
        v * a + (v + n2) * b,
        coh * rho0.0[2],
        coh.conj() * rho0.0[3],
        (1.0 - v) * c + (1.0 - v - n2) * d,
        v * c + (v + n2) * d,
    ])
}

/// Evolve `ρ₀` with the closed-form map at every grid node.
pub fn propagate_exact(rho0: &DensityVector, traj: &GreenTrajectory, eps_minus: f64) -> Result<PropagationResult> {
    rho0.check_physical(INITIAL_STATE_TOL)?;
    let states = (0..traj.len())
        .map(|k| exact_map(rho0, traj.u[k], traj.v[k], eps_minus, traj.grid.t(k)))
        .collect();
    Ok(PropagationResult::new(traj.grid, states, Method::ExactMap, false))
}

#[derive(Debug, Clone, Copy)]
struct Coeffs {
    kappa: f64,
    kappa_tilde: f64,
    eps_tilde: f64,
}

fn rhs(rho: &DensityVector, c: Coeffs, eps_minus: f64) -> DensityVector {
    let l = build_lt(c.kappa, c.kappa_tilde);
    let mut out = l.apply(rho);
    let phase = Complex64::new(0.0, c.eps_tilde - eps_minus);
    out.0[2] -= phase * rho.0[2];
    out.0[3] += phase * rho.0[3];
    out
}

fn axpy(x: &DensityVector, a: f64, y: &DensityVector) -> DensityVector {
    DensityVector(std::array::from_fn(|i| x.0[i] + a * y.0[i]))
}

/// Evolve `ρ₀` by fourth-order Runge–Kutta on the master equation
/// `ρ̇ = -i[H̃(t), ρ] + L_t ρ`, with the rates interpolated linearly between
/// grid nodes.
pub fn integrate_ode(rho0: &DensityVector, rates: &RateTrajectory, eps_minus: f64) -> Result<PropagationResult> {
    rho0.check_physical(INITIAL_STATE_TOL)?;
    let n = rates.len();
    if n == 0 {
        return Err(Error::SeriesTooShort { len: 0, window: 1 });
    }
    let dt = rates.grid.dt;
    let at = |k: usize| Coeffs {
        kappa: rates.kappa[k],
        kappa_tilde: rates.kappa_tilde[k],
        eps_tilde: rates.eps_tilde[k],
    };
    let mid = |a: Coeffs, b: Coeffs| Coeffs {
        kappa: 0.5 * (a.kappa + b.kappa),
        kappa_tilde: 0.5 * (a.kappa_tilde + b.kappa_tilde),
        eps_tilde: 0.5 * (a.eps_tilde + b.eps_tilde),
    };
    let mut states = Vec::with_capacity(n);
    states.push(*rho0);
    let mut rho = *rho0;
    for k in 0..n - 1 {
        let (c0, c1) = (at(k), at(k + 1));
        let cm = mid(c0, c1);
        let k1 = rhs(&rho, c0, eps_minus);
        let k2 = rhs(&axpy(&rho, 0.5 * dt, &k1), cm, eps_minus);
        let k3 = rhs(&axpy(&rho, 0.5 * dt, &k2), cm, eps_minus);
        let k4 = rhs(&axpy(&rho, dt, &k3), c1, eps_minus);
        rho = DensityVector(std::array::from_fn(|i| {
            rho.0[i] + dt / 6.0 * (k1.0[i] + 2.0 * k2.0[i] + 2.0 * k3.0[i] + k4.0[i])
        }));
        if rho.0.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite { step: k + 1 });
        }
        states.push(rho);
    }
    let grid = TimeGrid {
        dt,
        n_steps: rates.grid.n_steps,
    };
    Ok(PropagationResult::new(grid, states, Method::DirectOde, rates.truncated))
}

/// `(Tr ρ², Tr ρσ)`; the second is the fidelity when `σ` is pure.
pub fn purity_and_fidelity(rho: &DensityVector, target: &DensityVector) -> (f64, f64) {
    let overlap: Complex64 = [0usize, 1, 4, 5]
        .iter()
        .map(|&i| rho.0[i] * target.0[i])
        .sum::<Complex64>()
        + rho.0[2] * target.0[3]
        + rho.0[3] * target.0[2];
    (rho.purity(), overlap.re)
}
