// Copyright 2026 The dfs Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by the simulation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("delta kernel must be contracted analytically (wide-band model has no pointwise kernel)")]
    DeltaKernel,

    #[error("quadrature did not converge: error estimate {estimate:.3e} exceeds tolerance {tolerance:.3e}")]
    QuadratureNonConvergence { estimate: f64, tolerance: f64 },

    #[error("non-finite value in Green function at step {step}")]
    NonFinite { step: usize },

    #[error("imaginary residue {residue:.3e} of v at step {step} exceeds threshold")]
    ImaginaryResidue { step: usize, residue: f64 },

    #[error("rate series ({len} nodes) is shorter than the switch-off window ({window} nodes)")]
    SeriesTooShort { len: usize, window: usize },

    #[error("unphysical density vector: {0}")]
    Unphysical(String),

    #[error("state is mixed (purity {purity:.6}); a pure state is required")]
    MixedState { purity: f64 },

    #[error("no pure stabilized DF state exists for a superposition initial state")]
    NoPureStabilizedState,

    #[error("stabilization condition {condition} does not apply to initial state {initial}")]
    ConditionMismatch { initial: String, condition: String },

    #[error("line {line}: key `{key}`: {message}")]
    Parse { line: usize, key: String, message: String },

    #[error("{0}")]
    Config(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
