// Copyright 2026 The dfs Authors
// SPDX-License-Identifier: Apache-2.0

//! C ABI over `dfs-core`.
//!
//! Objects are opaque handles released with their `*_free` function. Every
//! fallible call returns a [`DfsStatus`]; the message of the last failure on
//! the calling thread is available from [`dfs_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;

use dfs_core::cli::{parse_scenario_file, trajectory_row, CSV_COLUMNS};
use dfs_core::error::Error;
use dfs_core::liouville::{build_lt, spectrum, PureState};
use dfs_core::rates::{bm_rates, SwitchOff};
use dfs_core::scenario::{preset, run_scenario, Condition, InitialState, ScenarioConfig, ScenarioReport};
use dfs_core::spectral::SpectralModel;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidModel = 3,
    Parse = 4,
    Numerical = 5,
    OutOfRange = 6,
    Panic = 7,
}

/// Trajectory columns, in the order of the CSV header.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfsColumn {
    T = 0,
    ReU,
    ImU,
    AbsU,
    V,
    VPlusU2,
    EpsTilde,
    Gamma,
    GammaTilde,
    Kappa,
    KappaTilde,
    RhoVv,
    RhoPp,
    ReRhoPm,
    ImRhoPm,
    RhoMm,
    RhoDd,
    Purity,
}

/// Stabilization verdict. States are indexed 0 = |v>, 1 = |+>, 2 = |->, 3 = |d>.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DfsVerdict {
    /// 0 none, 1 v->0, 2 v->1, 3 v+|u|^2->0, 4 v+|u|^2->1.
    pub condition: i32,
    /// Predicted state, or -1.
    pub predicted: i32,
    /// NaN without a prediction.
    pub fidelity: f64,
    pub purity: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DfsSpectrum {
    pub eigenvalues: [f64; 6],
    pub physical: [bool; 6],
    pub defective: bool,
    pub eigenvector_dim: usize,
}

/// Opaque spectral model.
pub struct DfsModel(SpectralModel);
/// Opaque scenario configuration.
pub struct DfsScenario(ScenarioConfig);
/// Opaque simulation report.
pub struct DfsReport(Box<ScenarioReport>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> DfsStatus {
    match e {
        Error::InvalidModel(_) | Error::InvalidGrid(_) => DfsStatus::InvalidModel,
        Error::Parse { .. } | Error::Config(_) | Error::Io { .. } => DfsStatus::Parse,
        Error::Unphysical(_) | Error::MixedState { .. } => DfsStatus::InvalidArgument,
        _ => DfsStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (DfsStatus, String)>) -> DfsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DfsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            DfsStatus::Panic
        }
    }
}

fn core(e: Error) -> (DfsStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (DfsStatus, String) {
    (DfsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (DfsStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (DfsStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (DfsStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (DfsStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Message of the last failure on this thread, or null. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn dfs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dfs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Lorentzian reservoir.
///
/// # Safety
/// `out_model` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dfs_model_lorentzian(
    gamma: f64,
    bandwidth: f64,
    eps0: f64,
    mu: f64,
    temperature: f64,
    out_model: *mut *mut DfsModel,
) -> DfsStatus {
    guard(|| {
        let slot = out(out_model, "out_model")?;
        let m = SpectralModel::lorentzian(gamma, bandwidth, eps0, mu, temperature).map_err(core)?;
        *slot = Box::into_raw(Box::new(DfsModel(m)));
        Ok(())
    })
}

/// Wide-band (flat) reservoir.
///
/// # Safety
/// `out_model` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dfs_model_wide_band(
    gamma: f64,
    eps0: f64,
    mu: f64,
    temperature: f64,
    out_model: *mut *mut DfsModel,
) -> DfsStatus {
    guard(|| {
        let slot = out(out_model, "out_model")?;
        let m = SpectralModel::wide_band(gamma, eps0, mu, temperature).map_err(core)?;
        *slot = Box::into_raw(Box::new(DfsModel(m)));
        Ok(())
    })
}

/// # Safety
/// `model` must come from a `dfs_model_*` constructor and not be used after.
#[no_mangle]
pub unsafe extern "C" fn dfs_model_free(model: *mut DfsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Spectral density at `omega`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dfs_model_spectral_density(model: *const DfsModel, omega: f64, out_j: *mut f64) -> DfsStatus {
    guard(|| {
        let m = deref(model, "model")?;
        *out(out_j, "out_j")? = m.0.spectral_density(omega);
        Ok(())
    })
}

/// Born–Markov rate constants.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dfs_bm_rates(model: *const DfsModel, kappa: *mut f64, kappa_tilde: *mut f64) -> DfsStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let (k, kt) = bm_rates(&m.0);
        *out(kappa, "kappa")? = k;
        *out(kappa_tilde, "kappa_tilde")? = kt;
        Ok(())
    })
}

/// Analytic spectrum of the generator at fixed rates.
///
/// # Safety
/// `out_spectrum` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dfs_liouville_spectrum(
    kappa: f64,
    kappa_tilde: f64,
    out_spectrum: *mut DfsSpectrum,
) -> DfsStatus {
    guard(|| {
        let slot = out(out_spectrum, "out_spectrum")?;
        if !kappa.is_finite() || !kappa_tilde.is_finite() {
            return Err((DfsStatus::InvalidArgument, "rates must be finite".into()));
        }
        let s = spectrum(&build_lt(kappa, kappa_tilde));
        *slot = DfsSpectrum {
            eigenvalues: s.eigenvalues,
            physical: s.physical,
            defective: s.defective,
            eigenvector_dim: s.eigenvector_dim,
        };
        Ok(())
    })
}

/// Scenario from `key = value` text.
///
/// # Safety
/// `text` must be NUL-terminated; `out_scenario` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dfs_scenario_parse(text: *const c_char, out_scenario: *mut *mut DfsScenario) -> DfsStatus {
    guard(|| {
        let slot = out(out_scenario, "out_scenario")?;
        let cfg = parse_scenario_file(c_str(text, "text")?).map_err(core)?;
        *slot = Box::into_raw(Box::new(DfsScenario(cfg)));
        Ok(())
    })
}

/// Number of scenarios in a named preset.
///
/// # Safety
/// `name` must be NUL-terminated; `count` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dfs_preset_count(name: *const c_char, count: *mut usize) -> DfsStatus {
    guard(|| {
        let slot = out(count, "count")?;
        *slot = preset(c_str(name, "name")?).map_err(core)?.len();
        Ok(())
    })
}

/// Scenario `index` of a named preset.
///
/// # Safety
/// `name` must be NUL-terminated; `out_scenario` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dfs_scenario_preset(
    name: *const c_char,
    index: usize,
    out_scenario: *mut *mut DfsScenario,
) -> DfsStatus {
    guard(|| {
        let slot = out(out_scenario, "out_scenario")?;
        let mut all = preset(c_str(name, "name")?).map_err(core)?;
        if index >= all.len() {
            return Err((DfsStatus::OutOfRange, format!("preset has {} scenarios", all.len())));
        }
        *slot = Box::into_raw(Box::new(DfsScenario(all.swap_remove(index))));
        Ok(())
    })
}

/// Scenario for a model on the default grid.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dfs_scenario_from_model(
    model: *const DfsModel,
    out_scenario: *mut *mut DfsScenario,
) -> DfsStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let slot = out(out_scenario, "out_scenario")?;
        let cfg = ScenarioConfig::for_model("ffi".into(), m.0).map_err(core)?;
        *slot = Box::into_raw(Box::new(DfsScenario(cfg)));
        Ok(())
    })
}

/// Replaces the time grid.
///
/// # Safety
/// `scenario` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dfs_scenario_set_grid(scenario: *mut DfsScenario, dt: f64, horizon: f64) -> DfsStatus {
    guard(|| {
        let s = out(scenario, "scenario")?;
        s.0.grid = dfs_core::greens::TimeGrid::from_horizon(dt, horizon).map_err(core)?;
        s.0.auto_horizon = false;
        Ok(())
    })
}

/// Pure basis initial state: 0 = |v>, 1 = |+>, 2 = |->, 3 = |d>.
///
/// # Safety
/// `scenario` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dfs_scenario_set_initial(scenario: *mut DfsScenario, state: u32) -> DfsStatus {
    guard(|| {
        let s = out(scenario, "scenario")?;
        let st = *PureState::ALL
            .get(state as usize)
            .ok_or_else(|| (DfsStatus::OutOfRange, format!("state index {state} outside 0..4")))?;
        s.0.initial = InitialState::Pure(st);
        Ok(())
    })
}

/// `α|+> + β|->` with complex amplitudes, normalised internally.
///
/// # Safety
/// `scenario` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dfs_scenario_set_superposition(
    scenario: *mut DfsScenario,
    alpha_re: f64,
    alpha_im: f64,
    beta_re: f64,
    beta_im: f64,
) -> DfsStatus {
    guard(|| {
        let s = out(scenario, "scenario")?;
        let st = InitialState::Superposition {
            alpha: Complex64::new(alpha_re, alpha_im),
            beta: Complex64::new(beta_re, beta_im),
        };
        st.density().map_err(core)?;
        s.0.initial = st;
        Ok(())
    })
}

/// # Safety
/// `scenario` must come from a `dfs_scenario_*` constructor and not be used after.
#[no_mangle]
pub unsafe extern "C" fn dfs_scenario_free(scenario: *mut DfsScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Runs the full pipeline.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dfs_run(scenario: *const DfsScenario, out_report: *mut *mut DfsReport) -> DfsStatus {
    guard(|| {
        let s = deref(scenario, "scenario")?;
        let slot = out(out_report, "out_report")?;
        let r = run_scenario(&s.0).map_err(core)?;
        *slot = Box::into_raw(Box::new(DfsReport(Box::new(r))));
        Ok(())
    })
}

/// # Safety
/// `report` must come from [`dfs_run`] and not be used after.
#[no_mangle]
pub unsafe extern "C" fn dfs_report_free(report: *mut DfsReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of grid nodes.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dfs_report_len(report: *const DfsReport, len: *mut usize) -> DfsStatus {
    guard(|| {
        let r = deref(report, "report")?;
        *out(len, "len")? = r.0.green.len();
        Ok(())
    })
}

/// Copies one column into `buf`, which must hold `dfs_report_len` values.
///
/// # Safety
/// `buf` must point to `cap` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn dfs_report_column(
    report: *const DfsReport,
    column: DfsColumn,
    buf: *mut f64,
    cap: usize,
) -> DfsStatus {
    guard(|| {
        let r = deref(report, "report")?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let n = r.0.green.len();
        if cap < n {
            return Err((DfsStatus::OutOfRange, format!("buffer holds {cap} values, need {n}")));
        }
        let col = column as usize;
        if col >= CSV_COLUMNS {
            return Err((DfsStatus::OutOfRange, format!("column {col}")));
        }
        let dst = std::slice::from_raw_parts_mut(buf, n);
        for (k, d) in dst.iter_mut().enumerate() {
            *d = trajectory_row(&r.0, k)[col];
        }
        Ok(())
    })
}

/// Stabilization verdict of a run.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dfs_report_verdict(report: *const DfsReport, verdict: *mut DfsVerdict) -> DfsStatus {
    guard(|| {
        let r = deref(report, "report")?;
        let v = &r.0.verdict;
        *out(verdict, "verdict")? = DfsVerdict {
            condition: match v.condition {
                Condition::None => 0,
                Condition::VToZero => 1,
                Condition::VToOne => 2,
                Condition::VPlusU2ToZero => 3,
                Condition::VPlusU2ToOne => 4,
            },
            predicted: v
                .predicted
                .map_or(-1, |p| PureState::ALL.iter().position(|s| *s == p).unwrap_or(0) as i32),
            fidelity: v.fidelity.unwrap_or(f64::NAN),
            purity: v.purity,
        };
        Ok(())
    })
}

/// Switch-off classification: 0 κ off, 1 κ̃ off, 2 neither, 3 both, -1 not
/// available. `t_s` is NaN when undefined.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dfs_report_switch_off(report: *const DfsReport, which: *mut i32, t_s: *mut f64) -> DfsStatus {
    guard(|| {
        let r = deref(report, "report")?;
        let w = out(which, "which")?;
        let t = out(t_s, "t_s")?;
        match &r.0.switch_off {
            Some(so) => {
                *w = match so.which {
                    SwitchOff::KappaOff => 0,
                    SwitchOff::KappaTildeOff => 1,
                    SwitchOff::NeitherOff => 2,
                    SwitchOff::BothOff => 3,
                };
                *t = so.t_s.unwrap_or(f64::NAN);
            }
            None => {
                *w = -1;
                *t = f64::NAN;
            }
        }
        Ok(())
    })
}
