// Copyright 2026 The dfs Authors
// SPDX-License-Identifier: Apache-2.0

//! Liouville-space form of the dissipator on the basis
//! `{|v⟩⟨v|, |+⟩⟨+|, |+⟩⟨-|, |-⟩⟨+|, |-⟩⟨-|, |d⟩⟨d|}`, its spectrum and the
//! decoherence-free states it admits.

use nalgebra::{Matrix4, Matrix6, Vector4, Vector6};
use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO_REL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const POSITIVITY_TOL: f64 = 1e-10;
const PURITY_TOL: f64 = 1e-10;

/// The four states allowed by particle-number superselection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PureState {
    /// Empty.
    V,
    Plus,
    Minus,
    /// Doubly occupied.
    D,
}

impl PureState {
    pub const ALL: [PureState; 4] = [PureState::V, PureState::Plus, PureState::Minus, PureState::D];

    /// Position of the diagonal element `|s⟩⟨s|` in a density vector.
    pub fn component(self) -> usize {
        match self {
            PureState::V => 0,
            PureState::Plus => 1,
            PureState::Minus => 4,
            PureState::D => 5,
        }
    }

    fn ket_index(self) -> usize {
        match self {
            PureState::V => 0,
            PureState::Plus => 1,
            PureState::Minus => 2,
            PureState::D => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PureState::V => "v",
            PureState::Plus => "+",
            PureState::Minus => "-",
            PureState::D => "d",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "v" | "V" | "|v>" => Some(PureState::V),
            "+" | "plus" | "|+>" => Some(PureState::Plus),
            "-" | "minus" | "|->" => Some(PureState::Minus),
            "d" | "D" | "|d>" => Some(PureState::D),
            _ => None,
        }
    }
}

impl std::fmt::Display for PureState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "|{}⟩", self.label())
    }
}

/// Density matrix components `(ρ_vv, ρ_++, ρ_+-, ρ_-+, ρ_--, ρ_dd)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityVector(pub [Complex64; 6]);

impl DensityVector {
    pub fn zero() -> Self {
        Self([Complex64::new(0.0, 0.0); 6])
    }

    pub fn pure(state: PureState) -> Self {
        let mut r = Self::zero();
        r.0[state.component()] = Complex64::new(1.0, 0.0);
        r
    }

    /// `|ψ⟩⟨ψ|` for `|ψ⟩ = α|+⟩ + β|-⟩`, normalized.
    pub fn superposition(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let n = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Unphysical(
                "superposition amplitudes are zero or non-finite".into(),
            ));
        }
        let (a, b) = (alpha / n, beta / n);
        let mut r = Self::zero();
        r.0[1] = Complex64::new(a.norm_sqr(), 0.0);
        r.0[2] = a * b.conj();
        r.0[3] = b * a.conj();
        r.0[4] = Complex64::new(b.norm_sqr(), 0.0);
        Ok(r)
    }

    pub fn from_real(v: &Vector6<f64>) -> Self {
        Self(std::array::from_fn(|i| Complex64::new(v[i], 0.0)))
    }

    pub fn vv(&self) -> f64 {
        self.0[0].re
    }
    pub fn pp(&self) -> f64 {
        self.0[1].re
    }
    pub fn pm(&self) -> Complex64 {
        self.0[2]
    }
    pub fn mp(&self) -> Complex64 {
        self.0[3]
    }
    pub fn mm(&self) -> f64 {
        self.0[4].re
    }
    pub fn dd(&self) -> f64 {
        self.0[5].re
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0] + self.0[1] + self.0[4] + self.0[5]
    }

    /// Largest deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        [0usize, 1, 4, 5]
            .iter()
            .map(|&i| self.0[i].im.abs())
            .fold((self.0[3] - self.0[2].conj()).norm(), f64::max)
    }

    /// Smallest eigenvalue of the (Hermitian part of the) density matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        let (a, c) = (self.pp(), self.mm());
        let b = 0.5 * (self.pm() + self.mp().conj());
        let block_min = 0.5 * (a + c) - (0.25 * (a - c) * (a - c) + b.norm_sqr()).sqrt();
        block_min.min(self.vv()).min(self.dd())
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `⟨s|ρ|s⟩`, the fidelity with a pure basis state.
    pub fn fidelity(&self, state: PureState) -> f64 {
        self.0[state.component()].re
    }

    /// Fidelity `⟨ψ|ρ|ψ⟩` with `|ψ⟩ = α|+⟩ + β|-⟩` (normalized here).
    pub fn fidelity_superposition(&self, alpha: Complex64, beta: Complex64) -> f64 {
        let n2 = alpha.norm_sqr() + beta.norm_sqr();
        let val = alpha.conj() * alpha * self.0[1]
            + alpha.conj() * self.0[2] * beta
            + beta.conj() * self.0[3] * alpha
            + beta.conj() * beta * self.0[4];
        val.re / n2
    }

    /// Checks Hermiticity, unit trace and positivity within `tol`.
    pub fn check_physical(&self, tol: f64) -> Result<()> {
        if self.0.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Unphysical("non-finite component".into()));
        }
        let h = self.hermiticity_error();
        if h > tol {
            return Err(Error::Unphysical(format!("not Hermitian (deviation {h:.3e})")));
        }
        let tr = self.trace();
        if (tr - 1.0).norm() > tol {
            return Err(Error::Unphysical(format!("trace {} ≠ 1", tr.re)));
        }
        let m = self.min_eigenvalue();
        if m < -tol {
            return Err(Error::Unphysical(format!("negative eigenvalue {m:.3e}")));
        }
        Ok(())
    }

    pub fn is_physical(&self, tol: f64) -> bool {
        self.check_physical(tol).is_ok()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Full 4×4 density matrix on `(v, +, -, d)`.
    pub fn to_matrix(&self) -> Matrix4<Complex64> {
        let z = Complex64::new(0.0, 0.0);
        let mut m = Matrix4::from_element(z);
        m[(0, 0)] = self.0[0];
        m[(1, 1)] = self.0[1];
        m[(1, 2)] = self.0[2];
        m[(2, 1)] = self.0[3];
        m[(2, 2)] = self.0[4];
        m[(3, 3)] = self.0[5];
        m
    }

    /// State vector of a pure density vector, up to a global phase.
    pub fn pure_ket(&self) -> Result<Vector4<Complex64>> {
        let p = self.purity();
        if (p - 1.0).abs() > PURITY_TOL || self.check_physical(1e-9).is_err() {
            return Err(Error::MixedState { purity: p });
        }
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        if self.vv() > 0.5 {
            return Ok(Vector4::new(one, z, z, z));
        }
        if self.dd() > 0.5 {
            return Ok(Vector4::new(z, z, z, one));
        }
        if self.pp() >= self.mm() {
            let a = self.pp().sqrt();
            Ok(Vector4::new(z, Complex64::new(a, 0.0), self.mp() / a, z))
        } else {
            let b = self.mm().sqrt();
            Ok(Vector4::new(z, self.pm() / b, Complex64::new(b, 0.0), z))
        }
    }
}

/// `L_t` for given `(κ, κ̃)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiouvilleMatrix {
    pub kappa: f64,
    pub kappa_tilde: f64,
    pub entries: Matrix6<f64>,
}

pub fn build_lt(kappa: f64, kappa_tilde: f64) -> LiouvilleMatrix {
    let mut m = Matrix6::zeros();
    for base in [0usize, 4] {
        m[(base, base)] = -2.0 * kappa_tilde;
        m[(base, base + 1)] = 2.0 * kappa;
        m[(base + 1, base)] = 2.0 * kappa_tilde;
        m[(base + 1, base + 1)] = -2.0 * kappa;
    }
    m[(2, 2)] = -(kappa + kappa_tilde);
    m[(3, 3)] = -(kappa + kappa_tilde);
    LiouvilleMatrix {
        kappa,
        kappa_tilde,
        entries: m,
    }
}

impl LiouvilleMatrix {
    pub fn apply(&self, rho: &DensityVector) -> DensityVector {
        let mut out = DensityVector::zero();
        for i in 0..6 {
            for j in 0..6 {
                out.0[i] += self.entries[(i, j)] * rho.0[j];
            }
        }
        out
    }

    fn scale(&self) -> f64 {
        self.kappa.abs().max(self.kappa_tilde.abs())
    }
}

/// Eigenvalues `l₁..l₆`, eigenvectors and per-vector physicality.
#[derive(Debug, Clone, PartialEq)]
pub struct LiouvilleSpectrum {
    pub eigenvalues: [f64; 6],
    /// Columns are `|l₁⟩..|l₆⟩`. In the defective case `|l₁⟩ ∥ |l₂⟩` and
    /// `|l₆⟩ ∥ |l₅⟩`.
    pub eigenvectors: [Vector6<f64>; 6],
    pub physical: [bool; 6],
    pub defective: bool,
    /// Dimension of the span of all eigenvectors.
    pub eigenvector_dim: usize,
}

fn is_zero(x: f64, scale: f64) -> bool {
    x.abs() <= ZERO_REL * scale.max(1e-30)
}

/// Normalizes a real vector to unit trace and checks it is a density
/// vector. Traceless vectors are never physical.
fn physical_vector(v: &Vector6<f64>) -> Option<DensityVector> {
    let tr = v[0] + v[1] + v[4] + v[5];
    let size = v.amax();
    if tr.abs() <= TRACE_TOL * size.max(1e-300) {
        return None;
    }
    let rho = DensityVector::from_real(&(v / tr));
    rho.is_physical(POSITIVITY_TOL).then_some(rho)
}

/// Closed-form eigen-decomposition of `L_t`.
pub fn spectrum(l: &LiouvilleMatrix) -> LiouvilleSpectrum {
    let (k, kt) = (l.kappa, l.kappa_tilde);
    let s = k + kt;
    let scale = l.scale();
    let e = |i: usize| Vector6::from_fn(|r, _| if r == i { 1.0 } else { 0.0 });
    let both_zero = is_zero(k, scale) && is_zero(kt, scale) || scale == 0.0;
    let s_zero = is_zero(s, scale);
    let norm = if s_zero { 1.0 } else { 1.0 / s };
    let eigenvectors = [
        (e(0) * k + e(1) * kt) * norm,
        (e(1) - e(0)) * 0.5,
        e(2),
        e(3),
        (e(5) - e(4)) * 0.5,
        (e(4) * k + e(5) * kt) * norm,
    ];
    let eigenvalues = [0.0, -2.0 * s, -s, -s, -2.0 * s, 0.0];
    let defective = s_zero && !both_zero;
    let (eigenvectors, eigenvector_dim) = if both_zero {
        // Every vector is an eigenvector; report the standard basis.
        (std::array::from_fn(e), 6)
    } else {
        (eigenvectors, if defective { 4 } else { 6 })
    };
    let physical = std::array::from_fn(|i| physical_vector(&eigenvectors[i]).is_some());
    LiouvilleSpectrum {
        eigenvalues,
        eigenvectors,
        physical,
        defective,
        eigenvector_dim,
    }
}

/// Outcome of comparing the closed-form spectrum with a generic numeric
/// decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericCheck {
    /// Largest distance between sorted analytic and numeric eigenvalues.
    pub eigenvalue_error: f64,
    /// Largest `‖L x - λ x‖ / ‖x‖` over the analytic eigenpairs.
    pub residual: f64,
    /// Null-space dimension of `L - λ` summed over distinct eigenvalues.
    pub eigenvector_dim: usize,
}

pub fn numeric_cross_check(l: &LiouvilleMatrix, spec: &LiouvilleSpectrum) -> NumericCheck {
    let m = l.entries;
    let mut numeric: Vec<f64> = m.complex_eigenvalues().iter().map(|z| z.re).collect();
    let imag = m.complex_eigenvalues().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    numeric.sort_by(f64::total_cmp);
    let mut analytic = spec.eigenvalues.to_vec();
    analytic.sort_by(f64::total_cmp);
    let eigenvalue_error = numeric
        .iter()
        .zip(&analytic)
        .map(|(a, b)| (a - b).abs())
        .fold(imag, f64::max);
    let residual = spec
        .eigenvectors
        .iter()
        .zip(&spec.eigenvalues)
        .map(|(x, &lam)| (m * x - x * lam).norm() / x.norm())
        .fold(0.0, f64::max);

    let scale = l.scale().max(1e-300);
    let mut distinct: Vec<f64> = Vec::new();
    for &lam in &analytic {
        if !distinct.iter().any(|&d| (d - lam).abs() <= ZERO_REL * scale) {
            distinct.push(lam);
        }
    }
    let eigenvector_dim = distinct
        .iter()
        .map(|&lam| {
            let shifted = m - Matrix6::identity() * lam;
            let sv = shifted.svd(false, false).singular_values;
            sv.iter().filter(|&&x| x <= ZERO_REL * scale).count()
        })
        .sum();
    NumericCheck {
        eigenvalue_error,
        residual,
        eigenvector_dim,
    }
}

/// DF states admitted by a given `(κ, κ̃)`.
#[derive(Debug, Clone, PartialEq)]
pub enum DfClass {
    /// `L_t = 0`.
    WholeSpace,
    /// Pure states left invariant by the dissipator.
    Pure(Vec<PureState>),
    /// Physical but mixed stationary states `|l₁⟩`, `|l₆⟩`.
    Mixed(Vec<DensityVector>),
    None,
}

impl DfClass {
    pub fn pure_states(&self) -> &[PureState] {
        match self {
            DfClass::Pure(s) => s,
            _ => &[],
        }
    }

    pub fn describe(&self) -> String {
        match self {
            DfClass::WholeSpace => "whole space".into(),
            DfClass::Pure(s) => {
                let names: Vec<String> = s.iter().map(|p| p.to_string()).collect();
                format!("pure {{{}}}", names.join(", "))
            }
            DfClass::Mixed(_) => "mixed stationary l1, l6".into(),
            DfClass::None => "none".into(),
        }
    }
}

/// Classify the zero-eigenvalue eigenvectors of `L_t` by physicality.
pub fn classify_df_states(spec: &LiouvilleSpectrum, kappa: f64, kappa_tilde: f64) -> DfClass {
    let scale = kappa.abs().max(kappa_tilde.abs());
    if scale == 0.0 || (is_zero(kappa, scale) && is_zero(kappa_tilde, scale)) {
        return DfClass::WholeSpace;
    }
    // Zero eigenspace: span{l₁, l₆}, or span{l₁, l₃, l₄, l₆} when defective.
    // In the defective case all of these are traceless.
    let candidates: Vec<DensityVector> = spec
        .eigenvalues
        .iter()
        .zip(&spec.eigenvectors)
        .filter(|(&lam, _)| is_zero(lam, scale))
        .filter_map(|(_, v)| physical_vector(v))
        .collect();
    if candidates.is_empty() {
        return DfClass::None;
    }
    let pure: Vec<PureState> = candidates
        .iter()
        .filter(|r| (r.purity() - 1.0).abs() <= PURITY_TOL)
        .filter_map(|r| {
            PureState::ALL
                .into_iter()
                .find(|&s| (r.fidelity(s) - 1.0).abs() <= PURITY_TOL)
        })
        .collect();
    if pure.len() == candidates.len() {
        let mut pure = pure;
        pure.sort();
        DfClass::Pure(pure)
    } else {
        DfClass::Mixed(candidates)
    }
}

/// `A₊` on `(v, +, -, d)`: `A₊|+⟩ = |v⟩`, `A₊|d⟩ = |-⟩`.
pub fn jump_lowering() -> Matrix4<Complex64> {
    let mut a = Matrix4::from_element(Complex64::new(0.0, 0.0));
    a[(PureState::V.ket_index(), PureState::Plus.ket_index())] = Complex64::new(1.0, 0.0);
    a[(PureState::Minus.ket_index(), PureState::D.ket_index())] = Complex64::new(1.0, 0.0);
    a
}

/// Local DF test for a pure state: eigenstate of every active jump operator
/// `F_α` with eigenvalue `c_α`, and `Σ a_α F_α†F_α |ψ⟩ = Σ a_α |c_α|² |ψ⟩`.
pub fn markovian_criterion_check(state: &DensityVector, kappa: f64, kappa_tilde: f64) -> Result<bool> {
    let psi = state.pure_ket()?;
    let lower = jump_lowering();
    let raise = lower.adjoint();
    let scale = kappa.abs().max(kappa_tilde.abs());
    let mut ops = Vec::new();
    if !is_zero(kappa, scale) {
        ops.push((kappa, lower));
    }
    if !is_zero(kappa_tilde, scale) {
        ops.push((kappa_tilde, raise));
    }
    let tol = 1e-10;
    let mut lhs = Vector4::from_element(Complex64::new(0.0, 0.0));
    let mut rhs_coeff = Complex64::new(0.0, 0.0);
    for (a, f) in &ops {
        let fpsi = f * psi;
        let c = psi.dotc(&fpsi);
        if (fpsi - psi * c).norm() > tol {
            return Ok(false);
        }
        lhs += f.adjoint() * fpsi * Complex64::new(*a, 0.0);
        rhs_coeff += c.norm_sqr() * *a;
    }
    Ok((lhs - psi * rhs_coeff).norm() <= tol * scale.max(1.0))
}
