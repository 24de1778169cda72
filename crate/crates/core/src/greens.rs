// Copyright 2026 The dfs Authors
// SPDX-License-Identifier: Apache-2.0

//! Retarded and correlation Green functions `u(t)`, `v(t)` of the coupled
//! level.
//!
//! `u` solves the Volterra integro-differential equation
//!
//! ```text
//! u̇(t) + iε₊ u(t) + ∫₀ᵗ g(t-τ) u(τ) dτ = 0,   u(0) = 1,
//! ```
//!
//! and `v(t) = ∫₀ᵗ∫₀ᵗ u(τ₁) g̃(τ₂-τ₁) u*(τ₂) dτ₁dτ₂`.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::{lorentz_tail_ft, lorentz_tail_mass, CompositeRule};
use crate::spectral::{g_tilde_on_grid, kernel_g, GTildeCache, QuadratureOptions, SpectralKind, SpectralModel};

const DEGENERACY_GUARD: f64 = 1e-8;
const IMAG_RESIDUE_MAX: f64 = 1e-10;
const AUDIT_POINTS: usize = 8;
/// Audits of the double integral are O(k²); later nodes are skipped.
const AUDIT_MAX_NODE: usize = 4000;

/// Uniform grid `t_k = k·dt`, `k = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, n_steps: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidGrid(format!("dt = {dt} must be finite and > 0")));
        }
        if n_steps < 2 {
            return Err(Error::InvalidGrid(format!("n_steps = {n_steps} must be ≥ 2")));
        }
        Ok(Self { dt, n_steps })
    }

    /// Grid covering `[0, horizon]`; the last node is the first at or past
    /// `horizon` (up to rounding).
    pub fn from_horizon(dt: f64, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "horizon = {horizon} must be finite and > 0"
            )));
        }
        let n = (horizon / dt - 1e-9).ceil();
        if !n.is_finite() || n > 1e9 {
            return Err(Error::InvalidGrid(format!("dt = {dt} too small for horizon {horizon}")));
        }
        Self::new(dt, n as usize)
    }

    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.t(self.n_steps)
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.t(k)).collect()
    }
}

/// Time-stepping scheme for the Volterra equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VolterraScheme {
    /// Euler predictor followed by one trapezoidal corrector.
    PredictorCorrector,
    /// Trapezoidal step with the linear endpoint equation solved exactly.
    Implicit,
    /// Implicit trapezoid on `dt` and `dt/2`, combined to cancel the
    /// leading `dt²` error term.
    #[default]
    Extrapolated,
}

/// `u` on a grid together with `u̇` taken from the equation of motion.
#[derive(Debug, Clone)]
pub struct USolution {
    pub u: Vec<Complex64>,
    pub u_dot: Vec<Complex64>,
}

/// `v` on a grid together with `v̇` from the differentiated double integral.
#[derive(Debug, Clone)]
pub struct VSolution {
    pub v: Vec<f64>,
    pub v_dot: Vec<f64>,
    pub audit: VAudit,
}

/// Spot checks of the incremental `v` against the full double integral.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VAudit {
    pub nodes: Vec<usize>,
    pub max_abs_diff: f64,
    pub max_imag_residue: f64,
    /// Error estimate of the sampled `g̃`.
    pub kernel_error: f64,
}

#[derive(Debug, Clone)]
pub struct GreenTrajectory {
    pub grid: TimeGrid,
    pub u: Vec<Complex64>,
    pub v: Vec<f64>,
    pub u_dot: Vec<Complex64>,
    pub v_dot: Vec<f64>,
    pub audit: VAudit,
}

impl GreenTrajectory {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Largest violation of `v ≥ 0` and `v + |u|² ≤ 1`.
    pub fn bound_violation(&self) -> f64 {
        self.u
            .iter()
            .zip(&self.v)
            .map(|(u, &v)| (-v).max(v + u.norm_sqr() - 1.0).max(u.norm() - 1.0))
            .fold(0.0, f64::max)
    }
}

/// Solve for `u` and `v` on `grid`.
pub fn solve_green(model: &SpectralModel, grid: &TimeGrid) -> Result<GreenTrajectory> {
    solve_green_with(model, grid, VolterraScheme::default(), &QuadratureOptions::default())
}

pub fn solve_green_with(
    model: &SpectralModel,
    grid: &TimeGrid,
    scheme: VolterraScheme,
    quad: &QuadratureOptions,
) -> Result<GreenTrajectory> {
    let us = solve_u_with(model, grid, scheme)?;
    let vs = compute_v_with(model, &us.u, grid, quad)?;
    Ok(GreenTrajectory {
        grid: *grid,
        u: us.u,
        v: vs.v,
        u_dot: us.u_dot,
        v_dot: vs.v_dot,
        audit: vs.audit,
    })
}

/// Numerical `u` on `grid` with the default scheme.
pub fn solve_u_numeric(model: &SpectralModel, grid: &TimeGrid) -> Result<USolution> {
    solve_u_with(model, grid, VolterraScheme::default())
}

pub fn solve_u_with(model: &SpectralModel, grid: &TimeGrid, scheme: VolterraScheme) -> Result<USolution> {
    model.validate()?;
    let n = grid.len();
    let dt = grid.dt;
    let ieps = Complex64::new(0.0, model.center);

    if model.kind == SpectralKind::WideBand {
        // The δ-kernel contracts to Γ/2 at the endpoint.
        let rate = ieps + 0.5 * model.gamma;
        let u: Vec<Complex64> = grid.times().iter().map(|&t| (-rate * t).exp()).collect();
        let u_dot = u.iter().map(|&x| -rate * x).collect();
        return Ok(USolution { u, u_dot });
    }

    if model.gamma == 0.0 {
        let u: Vec<Complex64> = grid
            .times()
            .iter()
            .map(|&t| Complex64::from_polar(1.0, -model.center * t))
            .collect();
        let u_dot = u.iter().map(|&x| -ieps * x).collect();
        return Ok(USolution { u, u_dot });
    }

    match scheme {
        VolterraScheme::PredictorCorrector => {
            trapezoid_volterra(model, dt, n, false).map(|(u, u_dot, _)| USolution { u, u_dot })
        }
        VolterraScheme::Implicit => trapezoid_volterra(model, dt, n, true).map(|(u, u_dot, _)| USolution { u, u_dot }),
        VolterraScheme::Extrapolated => {
            let (uc, _, hc) = trapezoid_volterra(model, dt, n, true)?;
            let (uf, _, hf) = trapezoid_volterra(model, 0.5 * dt, 2 * n - 1, true)?;
            let u: Vec<Complex64> = (0..n).map(|k| (4.0 * uf[2 * k] - uc[k]) / 3.0).collect();
            let u_dot = (0..n).map(|k| -ieps * u[k] - (4.0 * hf[2 * k] - hc[k]) / 3.0).collect();
            Ok(USolution { u, u_dot })
        }
    }
}

/// Trapezoidal product integration of the memory term. Returns `u`, `u̇` and
/// the memory convolution `∫₀ᵗ g(t-τ)u(τ)dτ` at each node.
#[allow(clippy::type_complexity)]
fn trapezoid_volterra(
    model: &SpectralModel,
    dt: f64,
    n: usize,
    implicit: bool,
) -> Result<(Vec<Complex64>, Vec<Complex64>, Vec<Complex64>)> {
    let ieps = Complex64::new(0.0, model.center);
    let g: Vec<Complex64> = (0..n).map(|k| kernel_g(model, k as f64 * dt)).collect::<Result<_>>()?;
    let zero = Complex64::new(0.0, 0.0);
    let mut u = vec![zero; n];
    let mut u_dot = vec![zero; n];
    let mut mem = vec![zero; n];
    u[0] = Complex64::new(1.0, 0.0);
    u_dot[0] = -ieps;

    let half_g0 = 0.5 * dt * g[0];
    for step in 0..n - 1 {
        let m = step + 1;
        // History part of the convolution at t_m, without the endpoint term.
        let mut hist = 0.5 * g[m] * u[0];
        for j in 1..m {
            hist += g[m - j] * u[j];
        }
        hist *= dt;
        let f_n = u_dot[step];
        let next = if implicit {
            (u[step] + 0.5 * dt * (f_n - hist)) / (1.0 + 0.5 * dt * (ieps + half_g0))
        } else {
            let pred = u[step] + dt * f_n;
            let f_pred = -ieps * pred - (hist + half_g0 * pred);
            u[step] + 0.5 * dt * (f_n + f_pred)
        };
        if !(next.re.is_finite() && next.im.is_finite()) {
            return Err(Error::NonFinite { step: m });
        }
        u[m] = next;
        mem[m] = hist + half_g0 * next;
        u_dot[m] = -ieps * next - mem[m];
    }
    Ok((u, u_dot, mem))
}

/// Closed-form `u(t)` for the Lorentzian density.
pub fn u_lorentz_analytic(model: &SpectralModel, t: f64) -> Complex64 {
    let (gamma, d, eps) = (model.gamma, model.bandwidth, model.center);
    let phase = Complex64::from_polar(1.0, -eps * t);
    if (d - 2.0 * gamma).abs() < DEGENERACY_GUARD * gamma.max(f64::MIN_POSITIVE) {
        return phase * (1.0 + 0.5 * d * t) * (-0.5 * d * t).exp();
    }
    let dg = Complex64::new(d * d - 2.0 * gamma * d, 0.0).sqrt();
    let (dp, dm) = (d + dg, d - dg);
    phase * (dp * (-0.5 * dm * t).exp() - dm * (-0.5 * dp * t).exp()) / (2.0 * dg)
}

/// Analytic `u̇(t)` for the Lorentzian density.
pub fn u_dot_lorentz_analytic(model: &SpectralModel, t: f64) -> Complex64 {
    let (gamma, d, eps) = (model.gamma, model.bandwidth, model.center);
    let ieps = Complex64::new(0.0, eps);
    let phase = Complex64::from_polar(1.0, -eps * t);
    if (d - 2.0 * gamma).abs() < DEGENERACY_GUARD * gamma.max(f64::MIN_POSITIVE) {
        let e = (-0.5 * d * t).exp();
        let inner = 0.5 * d * e - 0.5 * d * (1.0 + 0.5 * d * t) * e;
        return phase * inner - ieps * u_lorentz_analytic(model, t);
    }
    let dg = Complex64::new(d * d - 2.0 * gamma * d, 0.0).sqrt();
    let (dp, dm) = (d + dg, d - dg);
    // dp·dm = 2Γd
    let inner = (-0.5 * dp * dm) * ((-0.5 * dm * t).exp() - (-0.5 * dp * t).exp()) / (2.0 * dg);
    phase * inner - ieps * u_lorentz_analytic(model, t)
}

/// `v` on `grid` for a given `u` with default quadrature options.
pub fn compute_v(model: &SpectralModel, u: &[Complex64], grid: &TimeGrid) -> Result<VSolution> {
    compute_v_with(model, u, grid, &QuadratureOptions::default())
}

pub fn compute_v_with(
    model: &SpectralModel,
    u: &[Complex64],
    grid: &TimeGrid,
    quad: &QuadratureOptions,
) -> Result<VSolution> {
    model.validate()?;
    if u.len() != grid.len() {
        return Err(Error::InvalidGrid(format!(
            "u has {} samples, grid has {}",
            u.len(),
            grid.len()
        )));
    }
    match model.kind {
        SpectralKind::WideBand => wide_band_v(model, grid, quad),
        SpectralKind::Lorentzian => {
            let kernel = g_tilde_on_grid(model, grid.dt, grid.len(), quad)?;
            lorentz_v(u, grid, &kernel)
        }
    }
}

fn lorentz_v(u: &[Complex64], grid: &TimeGrid, kernel: &GTildeCache) -> Result<VSolution> {
    let n = grid.len();
    let dt = grid.dt;
    let gt = &kernel.values;
    let mut v_dot = vec![0.0; n];
    // I(t_m) = ∫₀^{t_m} g̃(t_m - τ) u(τ) dτ, trapezoidal.
    v_dot.par_iter_mut().enumerate().skip(1).for_each(|(m, out)| {
        let mut acc = 0.5 * (gt[m] * u[0] + gt[0] * u[m]);
        for j in 1..m {
            acc += gt[m - j] * u[j];
        }
        *out = 2.0 * (u[m].conj() * acc * dt).re;
    });
    let mut v = vec![0.0; n];
    for k in 1..n {
        v[k] = v[k - 1] + 0.5 * dt * (v_dot[k - 1] + v_dot[k]);
    }
    let audit = audit_double_integral(u, &v, kernel)?;
    Ok(VSolution { v, v_dot, audit })
}

/// Trapezoidal double integral at selected nodes.
fn audit_double_integral(u: &[Complex64], v: &[f64], kernel: &GTildeCache) -> Result<VAudit> {
    let n = u.len();
    let last = (n - 1).min(AUDIT_MAX_NODE);
    let nodes: Vec<usize> = (1..=AUDIT_POINTS)
        .map(|i| i * last / AUDIT_POINTS)
        .filter(|&k| k > 0)
        .collect();
    let dt = kernel.dt;
    let mut audit = VAudit {
        nodes: nodes.clone(),
        kernel_error: kernel.error_estimate,
        ..Default::default()
    };
    for &k in &nodes {
        let w = |i: usize| if i == 0 || i == k { 0.5 } else { 1.0 };
        let total: Complex64 = (0..=k)
            .into_par_iter()
            .map(|i| {
                let mut row = Complex64::new(0.0, 0.0);
                for (j, uj) in u.iter().enumerate().take(k + 1) {
                    row += w(j) * kernel.at(j as isize - i as isize) * uj.conj();
                }
                w(i) * u[i] * row
            })
            .sum::<Complex64>()
            * (dt * dt);
        let scale = total.norm().max(1.0);
        let residue = total.im.abs() / scale;
        if residue > IMAG_RESIDUE_MAX {
            return Err(Error::ImaginaryResidue { step: k, residue });
        }
        audit.max_imag_residue = audit.max_imag_residue.max(residue);
        audit.max_abs_diff = audit.max_abs_diff.max((total.re - v[k]).abs());
    }
    Ok(audit)
}

/// Wide-band `v` and `v̇` from their frequency representations with
/// `u = e^{-(iε₊+Γ/2)t}`:
///
/// ```text
/// v(t) = Γ/2π ∫ f (1 - 2e^{-Γt/2} cos xt + e^{-Γt}) / (x² + Γ²/4) dx
/// ```
///
/// with `x = ω - ε₊`. Outside a window around the level `f` is 0 or 1 and
/// the Lorentzian tails are done in closed form.
fn wide_band_v(model: &SpectralModel, grid: &TimeGrid, quad: &QuadratureOptions) -> Result<VSolution> {
    let n = grid.len();
    let gamma = model.gamma;
    if gamma == 0.0 {
        return Ok(VSolution {
            v: vec![0.0; n],
            v_dot: vec![0.0; n],
            audit: VAudit::default(),
        });
    }
    let a = 0.5 * gamma;
    let eps = model.center;
    let tol = quad.abs_tol.unwrap_or(1e-12);
    let mut w = ((model.mu - eps).abs() + 40.0 * model.temperature).max(200.0 * gamma);
    let leftover = |w: f64| {
        let mass = 4.0 * gamma / (2.0 * PI) * lorentz_tail_mass(w, a);
        (1.0 - model.fermi(eps - w)) * mass + model.fermi(eps + w) * mass
    };
    while leftover(w) > 0.25 * tol {
        w *= 1.5;
    }
    let t_max = grid.horizon();
    let mut panels = ((2.0 * w) / (6.0 / t_max).min(1.0)).ceil() as usize;

    let integrand = |x: f64, t: f64| {
        let (s, c) = (x * t).sin_cos();
        let e = (-a * t).exp();
        let den = x * x + a * a;
        (
            (1.0 - 2.0 * e * c + e * e) / den,
            (gamma * e * c + 2.0 * x * e * s - gamma * e * e) / den,
        )
    };
    let body = |rule: &CompositeRule, weights: &[f64], t: f64| {
        let mut acc = (0.0, 0.0);
        for (&om, &wt) in rule.nodes.iter().zip(weights) {
            let (p, q) = integrand(om - eps, t);
            acc.0 += wt * p;
            acc.1 += wt * q;
        }
        acc
    };
    let build = |panels: usize| {
        let rule = CompositeRule::new(eps - w, eps + w, panels, 16);
        let weights: Vec<f64> = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&om, &wt)| wt * model.fermi(om))
            .collect();
        (rule, weights)
    };
    let probes = [0.5 * t_max, t_max];
    let mut coarse = build(panels);
    let mut est = f64::INFINITY;
    for _ in 0..=quad.max_doublings {
        let fine = build(2 * panels);
        est = probes
            .iter()
            .map(|&t| {
                let (c0, c1) = body(&coarse.0, &coarse.1, t);
                let (f0, f1) = body(&fine.0, &fine.1, t);
                (c0 - f0).abs().max((c1 - f1).abs())
            })
            .fold(0.0, f64::max);
        if est <= tol {
            break;
        }
        coarse = fine;
        panels *= 2;
    }
    if est > tol {
        return Err(Error::QuadratureNonConvergence {
            estimate: est,
            tolerance: tol,
        });
    }
    let (rule, weights) = coarse;
    let pref = gamma / (2.0 * PI);
    let times = grid.times();
    let pairs: Vec<(f64, f64)> = times
        .par_iter()
        .map(|&t| {
            let (mut p, mut q) = body(&rule, &weights, t);
            // Lower tail x < -W, where f = 1; reflect x → -x.
            let e = (-a * t).exp();
            let mass = lorentz_tail_mass(w, a);
            let (k1, k2) = if t > 0.0 {
                lorentz_tail_ft(w, a, t)
            } else {
                (Complex64::new(mass, 0.0), Complex64::new(0.0, 0.0))
            };
            p += (1.0 + e * e) * mass - 2.0 * e * k1.re;
            q += gamma * e * k1.re + 2.0 * e * k2.im - gamma * e * e * mass;
            (pref * p, pref * q)
        })
        .collect();
    let audit = VAudit {
        kernel_error: est + leftover(w),
        ..Default::default()
    };
    Ok(VSolution {
        v: pairs.iter().map(|p| p.0).collect(),
        v_dot: pairs.iter().map(|p| p.1).collect(),
        audit,
    })
}

/// Principal-value level shift `P∫ dω/2π J(ω)/(ε₊ - ω)`.
pub fn lamb_shift(model: &SpectralModel) -> f64 {
    if model.kind == SpectralKind::WideBand || model.gamma == 0.0 {
        return 0.0;
    }
    // Pair ω = ε₊ ± x so the singularity cancels:
    // -∫₀^∞ [J(ε₊+x) - J(ε₊-x)] / x dx / 2π.
    let eps = model.center;
    let odd = |x: f64| (model.spectral_density(eps + x) - model.spectral_density(eps - x)) / x;
    let cut = 1e4 * model.bandwidth;
    let rule = CompositeRule::new(0.0, cut, 4096, 16);
    -rule.integrate(odd) / (2.0 * PI)
}

/// Born–Markov `u_BM(t)` and `v_BM(t)`.
pub fn bm_green(model: &SpectralModel, t: f64) -> (Complex64, f64) {
    let j = model.j_at_level();
    let eps = model.center + lamb_shift(model);
    let u = Complex64::from_polar((-0.5 * j * t).exp(), -eps * t);
    let v = (1.0 - (-j * t).exp()) * model.fermi(model.center);
    (u, v)
}
