// Copyright 2026 The dfs Authors
// SPDX-License-Identifier: Apache-2.0

//! Reservoir models and the memory kernels they induce.
//!
//! Energies are measured in units of the coupling Γ and times in units of
//! 1/Γ (ħ = k_B = 1). The two kernels entering the Green-function equations
//! are
//!
//! ```text
//! g(τ) = ∫ dω/2π J(ω) e^{-iωτ},        g̃(τ) = ∫ dω/2π J(ω) f(ω) e^{-iωτ}.
//! ```
//!
//! `g` has a closed form for the Lorentzian density. `g̃` is obtained by
//! composite Gauss–Legendre quadrature over a finite window around the level,
//! with the Lorentzian tails outside the window (where `f` is 0 or 1 to
//! within the error budget) added in closed form.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::{lorentz_tail_ft, lorentz_tail_mass, CompositeRule};

const FERMI_EXPONENT_CLAMP: f64 = 700.0;
const GL_ORDER: usize = 16;
const RESEED_EVERY: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralKind {
    Lorentzian,
    WideBand,
}

/// Reservoir spectral density `J(ω)` together with the initial occupation
/// `f(ω)` of the reservoir.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralModel {
    pub kind: SpectralKind,
    /// Coupling strength Γ. Zero describes a decoupled level.
    pub gamma: f64,
    /// Lorentzian half-width d. Ignored for the wide-band model.
    pub bandwidth: f64,
    /// Level energy ε₊, which is also the Lorentzian peak position.
    pub center: f64,
    /// Chemical potential μ = eV.
    pub mu: f64,
    /// Temperature k_B T.
    pub temperature: f64,
}

impl SpectralModel {
    pub fn lorentzian(gamma: f64, bandwidth: f64, center: f64, mu: f64, temperature: f64) -> Result<Self> {
        let m = Self {
            kind: SpectralKind::Lorentzian,
            gamma,
            bandwidth,
            center,
            mu,
            temperature,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn wide_band(gamma: f64, center: f64, mu: f64, temperature: f64) -> Result<Self> {
        let m = Self {
            kind: SpectralKind::WideBand,
            gamma,
            bandwidth: f64::INFINITY,
            center,
            mu,
            temperature,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.gamma, self.center, self.mu, self.temperature];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidModel("parameters must be finite".into()));
        }
        if self.gamma < 0.0 {
            return Err(Error::InvalidModel(format!("coupling Γ = {} must be ≥ 0", self.gamma)));
        }
        if self.temperature <= 0.0 {
            return Err(Error::InvalidModel(format!(
                "temperature T = {} must be > 0",
                self.temperature
            )));
        }
        if self.kind == SpectralKind::Lorentzian && !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "bandwidth d = {} must be finite and > 0",
                self.bandwidth
            )));
        }
        Ok(())
    }

    /// Spectral density `J(ω)`.
    pub fn spectral_density(&self, omega: f64) -> f64 {
        match self.kind {
            SpectralKind::Lorentzian => {
                let d2 = self.bandwidth * self.bandwidth;
                let x = omega - self.center;
                self.gamma * d2 / (x * x + d2)
            }
            SpectralKind::WideBand => self.gamma,
        }
    }

    /// Fermi occupation `1/(e^{(ω-μ)/T} + 1)`.
    pub fn fermi(&self, omega: f64) -> f64 {
        let x = ((omega - self.mu) / self.temperature).clamp(-FERMI_EXPONENT_CLAMP, FERMI_EXPONENT_CLAMP);
        1.0 / (x.exp() + 1.0)
    }

    /// J evaluated at the level, the Born–Markov decay rate.
    pub fn j_at_level(&self) -> f64 {
        self.spectral_density(self.center)
    }
}

/// `J(ω)`.
pub fn eval_j(model: &SpectralModel, omega: f64) -> f64 {
    model.spectral_density(omega)
}

/// `f(ω)`.
pub fn fermi(model: &SpectralModel, omega: f64) -> f64 {
    model.fermi(omega)
}

/// Closed-form `g(τ) = (Γd/2) e^{-(iε₊ + d)τ}` for the Lorentzian, τ ≥ 0.
pub fn kernel_g(model: &SpectralModel, tau: f64) -> Result<Complex64> {
    match model.kind {
        SpectralKind::WideBand => Err(Error::DeltaKernel),
        SpectralKind::Lorentzian => {
            if tau < 0.0 {
                return Err(Error::Config(format!("kernel_g needs τ ≥ 0, got {tau}")));
            }
            let amp = 0.5 * model.gamma * model.bandwidth;
            Ok(amp * (Complex64::new(-model.bandwidth * tau, -model.center * tau)).exp())
        }
    }
}

/// Both kernels at one time lag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSample {
    pub tau: f64,
    pub g: Complex64,
    pub g_tilde: Complex64,
}

pub fn kernel_sample(model: &SpectralModel, tau: f64) -> Result<KernelSample> {
    Ok(KernelSample {
        tau,
        g: kernel_g(model, tau.abs()).map(|g| if tau < 0.0 { g.conj() } else { g })?,
        g_tilde: kernel_g_tilde(model, tau)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Absolute tolerance; `None` means `1e-10 Γ²`.
    pub abs_tol: Option<f64>,
    /// Maximum number of panel doublings before giving up.
    pub max_doublings: u32,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            abs_tol: None,
            max_doublings: 12,
        }
    }
}

impl QuadratureOptions {
    fn tolerance(&self, model: &SpectralModel) -> f64 {
        self.abs_tol
            .unwrap_or(1e-10 * (model.gamma * model.gamma).max(f64::MIN_POSITIVE))
    }
}

/// `g̃(τ)` at a single lag with default options.
pub fn kernel_g_tilde(model: &SpectralModel, tau: f64) -> Result<Complex64> {
    kernel_g_tilde_with(model, tau, &QuadratureOptions::default()).map(|(v, _)| v)
}

/// `g̃(τ)` and its error estimate. Negative lags are reflected,
/// `g̃(-τ) = conj(g̃(τ))`.
pub fn kernel_g_tilde_with(model: &SpectralModel, tau: f64, opts: &QuadratureOptions) -> Result<(Complex64, f64)> {
    let window = GTildeWindow::build(model, tau.abs(), opts)?;
    let v = window.eval(tau.abs());
    Ok((if tau < 0.0 { v.conj() } else { v }, window.error_estimate))
}

/// `g̃` sampled at `τ_k = k·dt`, `k = 0..len`.
#[derive(Debug, Clone)]
pub struct GTildeCache {
    pub dt: f64,
    pub values: Vec<Complex64>,
    pub error_estimate: f64,
}

impl GTildeCache {
    /// `g̃(k·dt)` for any integer `k`, reflecting negative lags.
    pub fn at(&self, k: isize) -> Complex64 {
        if k >= 0 {
            self.values[k as usize]
        } else {
            self.values[(-k) as usize].conj()
        }
    }
}

pub fn g_tilde_on_grid(model: &SpectralModel, dt: f64, len: usize, opts: &QuadratureOptions) -> Result<GTildeCache> {
    let tau_max = dt * len.saturating_sub(1) as f64;
    let window = GTildeWindow::build(model, tau_max, opts)?;
    let values = window.eval_uniform(dt, len);
    Ok(GTildeCache {
        dt,
        values,
        error_estimate: window.error_estimate,
    })
}

/// Quadrature nodes over `[ε₊ - W, ε₊ + W]` with amplitudes `w J f / 2π`,
/// plus the closed-form lower Lorentzian tail.
struct GTildeWindow {
    center: f64,
    half_width: f64,
    omegas: Vec<f64>,
    amps: Vec<f64>,
    /// Γd²/2π; zero when there is no analytic tail.
    tail_scale: f64,
    bandwidth: f64,
    error_estimate: f64,
}

impl GTildeWindow {
    fn build(model: &SpectralModel, tau_max: f64, opts: &QuadratureOptions) -> Result<Self> {
        model.validate()?;
        if model.kind == SpectralKind::WideBand {
            return Err(Error::DeltaKernel);
        }
        let (d, t, eps, mu, gamma) = (model.bandwidth, model.temperature, model.center, model.mu, model.gamma);
        let tol = opts.tolerance(model);
        if gamma == 0.0 {
            return Ok(Self {
                center: eps,
                half_width: 0.0,
                omegas: vec![],
                amps: vec![],
                tail_scale: 0.0,
                bandwidth: d,
                error_estimate: 0.0,
            });
        }

        // Beyond the window f is replaced by 1 (below) or 0 (above); widen
        // until the leftover occupation error fits the budget.
        let mut w = (20.0 * d).max((mu - eps).abs() + 20.0 * t).max(50.0 * gamma);
        let leftover = |w: f64| {
            let mass = gamma * d * d / (2.0 * PI) * lorentz_tail_mass(w, d);
            (1.0 - model.fermi(eps - w)) * mass + model.fermi(eps + w) * mass
        };
        let mut widenings = 0;
        while leftover(w) > 0.25 * tol {
            w *= 1.5;
            widenings += 1;
            if widenings > 80 {
                return Err(Error::QuadratureNonConvergence {
                    estimate: leftover(w),
                    tolerance: tol,
                });
            }
        }
        let tail_error = leftover(w);

        let mut h0 = 1.0f64;
        if tau_max > 0.0 {
            h0 = h0.min(6.0 / tau_max);
        }
        let mut panels = ((2.0 * w) / h0).ceil() as usize;
        let probes = [0.0, 0.5 * tau_max, tau_max];
        let mut coarse = Self::assemble(model, w, panels, 0.0);
        let mut coarse_vals: Vec<Complex64> = probes.iter().map(|&tau| coarse.eval(tau)).collect();
        for _ in 0..=opts.max_doublings {
            let fine = Self::assemble(model, w, 2 * panels, 0.0);
            let est = probes
                .iter()
                .zip(&coarse_vals)
                .map(|(&tau, c)| (fine.eval(tau) - c).norm())
                .fold(0.0, f64::max);
            if est + tail_error <= tol {
                coarse.error_estimate = est + tail_error;
                return Ok(coarse);
            }
            panels *= 2;
            coarse_vals = probes.iter().map(|&tau| fine.eval(tau)).collect();
            coarse = fine;
            if panels > 1 << 26 {
                return Err(Error::QuadratureNonConvergence {
                    estimate: est + tail_error,
                    tolerance: tol,
                });
            }
        }
        let fine = Self::assemble(model, w, 2 * panels, 0.0);
        let est = probes
            .iter()
            .zip(&coarse_vals)
            .map(|(&tau, c)| (fine.eval(tau) - c).norm())
            .fold(0.0, f64::max);
        Err(Error::QuadratureNonConvergence {
            estimate: est + tail_error,
            tolerance: tol,
        })
    }

    fn assemble(model: &SpectralModel, w: f64, panels: usize, error_estimate: f64) -> Self {
        let eps = model.center;
        let rule = CompositeRule::new(eps - w, eps + w, panels, GL_ORDER);
        let amps = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&om, &wt)| wt * model.spectral_density(om) * model.fermi(om) / (2.0 * PI))
            .collect();
        Self {
            center: eps,
            half_width: w,
            omegas: rule.nodes,
            amps,
            tail_scale: model.gamma * model.bandwidth * model.bandwidth / (2.0 * PI),
            bandwidth: model.bandwidth,
            error_estimate,
        }
    }

    /// Contribution of `ω < ε₊ - W`, where `f = 1`.
    fn lower_tail(&self, tau: f64) -> Complex64 {
        if self.tail_scale == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if tau == 0.0 {
            return Complex64::new(
                self.tail_scale * lorentz_tail_mass(self.half_width, self.bandwidth),
                0.0,
            );
        }
        let (k1, _) = lorentz_tail_ft(self.half_width, self.bandwidth, tau);
        Complex64::from_polar(self.tail_scale, -self.center * tau) * k1
    }

    fn eval(&self, tau: f64) -> Complex64 {
        let body: Complex64 = self
            .omegas
            .iter()
            .zip(&self.amps)
            .map(|(&om, &a)| Complex64::from_polar(a, -om * tau))
            .sum();
        body + self.lower_tail(tau)
    }

    fn eval_uniform(&self, dt: f64, len: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); len];
        out.par_chunks_mut(RESEED_EVERY).enumerate().for_each(|(chunk, slot)| {
            let k0 = chunk * RESEED_EVERY;
            let mut phase: Vec<Complex64> = self
                .omegas
                .iter()
                .map(|&om| Complex64::from_polar(1.0, -om * dt * k0 as f64))
                .collect();
            let step: Vec<Complex64> = self
                .omegas
                .iter()
                .map(|&om| Complex64::from_polar(1.0, -om * dt))
                .collect();
            for (i, v) in slot.iter_mut().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for ((p, s), &a) in phase.iter_mut().zip(&step).zip(&self.amps) {
                    acc += *p * a;
                    *p *= s;
                }
                *v = acc + self.lower_tail(dt * (k0 + i) as f64);
            }
        });
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn lorentz(d: f64, mu: f64) -> SpectralModel {
        SpectralModel::lorentzian(1.0, d, 0.2, mu, 0.3).unwrap()
    }

    #[test]
    fn spectral_density_values() {
        let m = SpectralModel::lorentzian(1.0, 5.0, 0.2, 0.0, 0.3).unwrap();
        assert_abs_diff_eq!(eval_j(&m, 0.2), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eval_j(&m, 5.2), 0.5, epsilon = 1e-15);
        let wb = SpectralModel::wide_band(1.0, 0.2, 0.0, 0.3).unwrap();
        assert_eq!(eval_j(&wb, -123.0), 1.0);
    }

    #[test]
    fn fermi_values() {
        let m = lorentz(5.0, 10.0);
        assert_abs_diff_eq!(fermi(&m, 10.0), 0.5, epsilon = 1e-15);
        // exp(-9.8/0.3) = 6.46e-15
        let expect = (-(9.8f64) / 0.3).exp();
        assert_abs_diff_eq!(1.0 - fermi(&m, 0.2), expect, epsilon = 1e-16);
        let low = lorentz(5.0, -10.0);
        let expect_low = (-(10.2f64) / 0.3).exp();
        assert_abs_diff_eq!(fermi(&low, 0.2), expect_low, epsilon = 1e-25);
        // clamped far tails stay finite and ordered
        assert!(fermi(&m, 1e6) >= 0.0 && fermi(&m, -1e6) == 1.0);
    }

    #[test]
    fn invalid_models_rejected() {
        assert!(SpectralModel::lorentzian(1.0, 0.0, 0.2, 0.0, 0.3).is_err());
        assert!(SpectralModel::lorentzian(1.0, 1.0, 0.2, 0.0, 0.0).is_err());
        assert!(SpectralModel::lorentzian(-1.0, 1.0, 0.2, 0.0, 0.3).is_err());
        assert!(SpectralModel::wide_band(1.0, 0.2, f64::NAN, 0.3).is_err());
    }

    #[test]
    fn kernel_g_closed_form() {
        let m = SpectralModel::lorentzian(1.0, 5.0, 0.2, 0.0, 0.3).unwrap();
        let g0 = kernel_g(&m, 0.0).unwrap();
        assert_abs_diff_eq!(g0.re, 2.5, epsilon = 1e-15);
        assert_abs_diff_eq!(g0.im, 0.0, epsilon = 1e-15);
        let g = kernel_g(&m, 0.2).unwrap();
        let want = 2.5 * (-1.0f64).exp() * Complex64::from_polar(1.0, -0.04);
        assert!((g - want).norm() < 1e-15);
        assert!(kernel_g(&m, 200.0).unwrap().norm() < 1e-300);
    }

    #[test]
    fn wide_band_kernels_refuse_pointwise_sampling() {
        let wb = SpectralModel::wide_band(1.0, 0.2, 0.0, 0.3).unwrap();
        assert_eq!(kernel_g(&wb, 0.1), Err(Error::DeltaKernel));
        assert_eq!(kernel_g_tilde(&wb, 0.1), Err(Error::DeltaKernel));
    }

    #[test]
    fn g_tilde_hermitian_reflection() {
        let m = lorentz(2.0, 1.0);
        let a = kernel_g_tilde(&m, 0.7).unwrap();
        let b = kernel_g_tilde(&m, -0.7).unwrap();
        assert_eq!(a.conj(), b);
    }

    #[test]
    fn g_tilde_limits() {
        // Far above the level g̃ is g minus the Lorentzian tail beyond μ, plus
        // the thermal smearing of the step, which for J ≈ J(μ) is
        // J(μ) e^{-iμτ} (πTτ/sinh(πTτ) - 1)/(-iτ) / 2π.
        let high = lorentz(10.0, 1e4);
        let scale = 100.0 / (2.0 * PI);
        let (x, mu): (f64, f64) = (1e4 - 0.2, 1e4);
        let j_mu = 100.0 / (x * x + 100.0);
        for tau in [0.0, 0.05, 0.3, 1.0] {
            let gt = kernel_g_tilde(&high, tau).unwrap();
            let g = kernel_g(&high, tau).unwrap();
            let (tail, smear) = if tau == 0.0 {
                (
                    Complex64::new(scale * lorentz_tail_mass(x, 10.0), 0.0),
                    Complex64::new(0.0, 0.0),
                )
            } else {
                let s = PI * 0.3 * tau;
                (
                    Complex64::from_polar(scale, -0.2 * tau) * lorentz_tail_ft(x, 10.0, tau).0.conj(),
                    j_mu * Complex64::from_polar(1.0, -mu * tau) * (s / s.sinh() - 1.0)
                        / Complex64::new(0.0, -tau)
                        / (2.0 * PI),
                )
            };
            let want = g - tail + smear;
            assert!((gt - want).norm() < 2e-10, "τ={tau}: {gt} vs {want}");
        }
        // f ≡ 0: g̃ → 0 up to the Lorentzian mass below μ.
        let low = lorentz(10.0, -1e4);
        for tau in [0.0, 0.3] {
            assert!(kernel_g_tilde(&low, tau).unwrap().norm() < 2e-3);
        }
    }

    #[test]
    fn g_tilde_grid_matches_pointwise() {
        let m = lorentz(0.5, 2.0);
        let dt = 0.01;
        let cache = g_tilde_on_grid(&m, dt, 1001, &QuadratureOptions::default()).unwrap();
        for k in [0usize, 1, 257, 600, 1000] {
            let direct = kernel_g_tilde(&m, k as f64 * dt).unwrap();
            assert!((cache.values[k] - direct).norm() < 1e-9, "k={k}");
        }
        assert_eq!(cache.at(-3), cache.values[3].conj());
    }

    #[test]
    fn decoupled_reservoir_has_zero_kernels() {
        let m = SpectralModel::lorentzian(0.0, 1.0, 0.2, 0.0, 0.3).unwrap();
        assert_eq!(kernel_g_tilde(&m, 0.4).unwrap(), Complex64::new(0.0, 0.0));
    }
}
