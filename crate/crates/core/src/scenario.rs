// Copyright 2026 The dfs Authors
// SPDX-License-Identifier: Apache-2.0

//! Named parameter sets, the full simulation pipeline, stabilization
//! verdicts, sweeps and the Born–Markov comparison.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::greens::{bm_green, solve_green, GreenTrajectory, TimeGrid};
use crate::liouville::{build_lt, classify_df_states, spectrum, DensityVector, DfClass, LiouvilleSpectrum, PureState};
use crate::propagate::{integrate_ode, propagate_exact, PropagationResult, StateBasis};
use crate::rates::{
    bm_rates, detect_switch_off, rates_from_uv, rates_simplified, RateTrajectory, SwitchOff, SwitchOffReport,
    DEFAULT_SWITCH_OFF_TOL, DEFAULT_SWITCH_OFF_WINDOW,
};
use crate::spectral::{SpectralKind, SpectralModel};

pub const REFERENCE_EPS0: f64 = 0.2;
pub const REFERENCE_TEMPERATURE: f64 = 0.3;
pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_HORIZON: f64 = 10.0;
pub const EXTENDED_HORIZON: f64 = 40.0;
pub const STEADY_TOL: f64 = 0.02;
pub const STEADY_FRACTION: f64 = 0.2;

/// `10/Γ`, or `40/Γ` when `d < Γ`.
pub fn default_horizon(model: &SpectralModel) -> f64 {
    if model.kind == SpectralKind::Lorentzian && model.bandwidth < model.gamma {
        EXTENDED_HORIZON
    } else {
        DEFAULT_HORIZON
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    Pure(PureState),
    /// `α|+⟩ + β|-⟩`.
    Superposition {
        alpha: Complex64,
        beta: Complex64,
    },
}

impl InitialState {
    pub fn density(&self) -> Result<DensityVector> {
        match *self {
            InitialState::Pure(s) => Ok(DensityVector::pure(s)),
            InitialState::Superposition { alpha, beta } => DensityVector::superposition(alpha, beta),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            InitialState::Pure(s) => s.to_string(),
            InitialState::Superposition { alpha, beta } => format!("({alpha})|+⟩ + ({beta})|-⟩"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub model: SpectralModel,
    pub grid: TimeGrid,
    /// Re-derive the horizon from the bandwidth when sweeping it.
    pub auto_horizon: bool,
    pub initial: InitialState,
    pub phi: f64,
    /// Energy of the decoupled level.
    pub eps_minus: f64,
    pub switch_off_tol: f64,
    pub switch_off_window: f64,
    pub steady_tol: f64,
}

impl ScenarioConfig {
    /// Lorentzian reservoir at the reference level and temperature, empty
    /// initial state, default grid.
    pub fn reference(d: f64, mu: f64) -> Result<Self> {
        let model = SpectralModel::lorentzian(1.0, d, REFERENCE_EPS0, mu, REFERENCE_TEMPERATURE)?;
        Self::for_model(format!("d={d},mu={mu}"), model)
    }

    pub fn for_model(name: String, model: SpectralModel) -> Result<Self> {
        let grid = TimeGrid::from_horizon(DEFAULT_DT, default_horizon(&model))?;
        Ok(Self {
            name,
            eps_minus: model.center,
            model,
            grid,
            auto_horizon: true,
            initial: InitialState::Pure(PureState::V),
            phi: 0.0,
            switch_off_tol: DEFAULT_SWITCH_OFF_TOL,
            switch_off_window: DEFAULT_SWITCH_OFF_WINDOW,
            steady_tol: STEADY_TOL,
        })
    }

    pub fn with_initial(mut self, initial: InitialState) -> Self {
        self.initial = initial;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        TimeGrid::new(self.grid.dt, self.grid.n_steps)?;
        let bad = |x: f64, lo: f64| x.is_nan() || x < lo;
        if bad(self.switch_off_tol, f64::MIN_POSITIVE) || bad(self.switch_off_window, 0.0) {
            return Err(Error::Config("switch-off tolerance must be > 0 and window ≥ 0".into()));
        }
        if bad(self.steady_tol, f64::MIN_POSITIVE) {
            return Err(Error::Config("steady tolerance must be > 0".into()));
        }
        self.initial.density()?;
        Ok(())
    }
}

/// A named group of scenarios.
#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub bandwidths: &'static [f64],
    pub biases: &'static [f64],
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig1",
        description: "|u(t)| for d = 10, 2, 0.5 Γ",
        bandwidths: &[10.0, 2.0, 0.5],
        biases: &[0.0],
    },
    Preset {
        name: "fig2a",
        description: "rates at d = 10Γ, μ = -10, 0, 10 Γ",
        bandwidths: &[10.0],
        biases: &[-10.0, 0.0, 10.0],
    },
    Preset {
        name: "fig2c",
        description: "rates at d = 0.5Γ, μ = -10, 0, 10 Γ",
        bandwidths: &[0.5],
        biases: &[-10.0, 0.0, 10.0],
    },
    Preset {
        name: "fig3a",
        description: "v(t) at d = 10Γ, μ = -10, -2, 0, 2, 10 Γ",
        bandwidths: &[10.0],
        biases: &[-10.0, -2.0, 0.0, 2.0, 10.0],
    },
    Preset {
        name: "fig3c",
        description: "v(t) at d = 0.5Γ, μ = -10, -2, 0, 2, 10 Γ",
        bandwidths: &[0.5],
        biases: &[-10.0, -2.0, 0.0, 2.0, 10.0],
    },
];

/// Scenarios of a named preset, one per (d, μ) pair.
pub fn preset(name: &str) -> Result<Vec<ScenarioConfig>> {
    let p = PRESETS
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::Config(format!("unknown preset `{name}`")))?;
    let mut out = Vec::new();
    for &d in p.bandwidths {
        for &mu in p.biases {
            let mut cfg = ScenarioConfig::reference(d, mu)?;
            cfg.name = format!("{}_d{}_mu{}", p.name, d, mu);
            out.push(cfg);
        }
    }
    Ok(out)
}

/// Steady-state conditions used by the stabilization table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    VToZero,
    VToOne,
    VPlusU2ToZero,
    VPlusU2ToOne,
    None,
}

impl Condition {
    pub fn as_str(&self) -> &'static str {
        match self {
            Condition::VToZero => "v->0",
            Condition::VToOne => "v->1",
            Condition::VPlusU2ToZero => "v+|u|^2->0",
            Condition::VPlusU2ToOne => "v+|u|^2->1",
            Condition::None => "none",
        }
    }
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn effective_pure(initial: &InitialState) -> Option<PureState> {
    match *initial {
        InitialState::Pure(s) => Some(s),
        InitialState::Superposition { alpha, .. } if alpha.norm() == 0.0 => Some(PureState::Minus),
        InitialState::Superposition { beta, .. } if beta.norm() == 0.0 => Some(PureState::Plus),
        InitialState::Superposition { .. } => None,
    }
}

/// DF state reached from a pure initial state under a steady condition.
pub fn table1_lookup(initial: &InitialState, condition: Condition) -> Result<PureState> {
    let s = effective_pure(initial).ok_or(Error::NoPureStabilizedState)?;
    use Condition::*;
    use PureState::*;
    let hit = match (s, condition) {
        (V, VToZero) => V,
        (V, VToOne) => Plus,
        (Plus, VPlusU2ToZero) => V,
        (Plus, VPlusU2ToOne) => Plus,
        (Minus, VToZero) => Minus,
        (Minus, VToOne) => D,
        (D, VPlusU2ToZero) => Minus,
        (D, VPlusU2ToOne) => D,
        _ => {
            return Err(Error::ConditionMismatch {
                initial: s.to_string(),
                condition: condition.to_string(),
            })
        }
    };
    Ok(hit)
}

/// Mean over the trailing fraction of a series, provided it stays within
/// `tol` of the mean there.
pub fn steady_value(series: &[f64], fraction: f64, tol: f64) -> Option<f64> {
    if series.is_empty() {
        return None;
    }
    let start = ((1.0 - fraction) * (series.len() - 1) as f64).floor() as usize;
    let tail = &series[start..];
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    tail.iter().all(|x| (x - mean).abs() < tol).then_some(mean)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilizationVerdict {
    pub condition: Condition,
    pub predicted: Option<PureState>,
    pub achieved: DensityVector,
    /// Fidelity of the achieved state with the predicted one.
    pub fidelity: Option<f64>,
    pub purity: f64,
    /// Why no prediction was made, if none was.
    pub note: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SpectrumSample {
    pub t: f64,
    pub kappa: f64,
    pub kappa_tilde: f64,
    pub spectrum: LiouvilleSpectrum,
    pub df: DfClass,
}

#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub config: ScenarioConfig,
    pub green: GreenTrajectory,
    pub rates: RateTrajectory,
    /// Node-wise deviation between the two rate formulas.
    pub rate_identity_error: f64,
    pub switch_off: Option<SwitchOffReport>,
    pub spectrum_timeline: Vec<SpectrumSample>,
    /// DF classification from the late-time rates, with switched-off rates
    /// set to zero.
    pub late_df: DfClass,
    pub propagation: PropagationResult,
    /// Element-wise gap between the exact map and the master-equation ODE.
    pub ode_max_diff: Option<f64>,
    pub steady_v: Option<f64>,
    pub steady_v_plus_u2: Option<f64>,
    pub verdict: StabilizationVerdict,
    /// Stage failures that did not stop the run.
    pub failures: Vec<String>,
}

impl ScenarioReport {
    pub fn v_plus_u2(&self) -> Vec<f64> {
        self.green
            .u
            .iter()
            .zip(&self.green.v)
            .map(|(u, v)| v + u.norm_sqr())
            .collect()
    }
}

fn late_classification(rates: &RateTrajectory, switch: Option<&SwitchOffReport>) -> DfClass {
    let Some(k) = rates.len().checked_sub(1) else {
        return DfClass::None;
    };
    let (mut kappa, mut kappa_tilde) = (rates.kappa[k], rates.kappa_tilde[k]);
    match switch.map(|s| s.which) {
        Some(SwitchOff::KappaOff) => kappa = 0.0,
        Some(SwitchOff::KappaTildeOff) => kappa_tilde = 0.0,
        Some(SwitchOff::BothOff) => {
            kappa = 0.0;
            kappa_tilde = 0.0;
        }
        _ => {}
    }
    classify_df_states(&spectrum(&build_lt(kappa, kappa_tilde)), kappa, kappa_tilde)
}

fn verdict(cfg: &ScenarioConfig, final_state: &DensityVector, v: Option<f64>, vu: Option<f64>) -> StabilizationVerdict {
    let purity = final_state.purity();
    let mut out = StabilizationVerdict {
        condition: Condition::None,
        predicted: None,
        achieved: *final_state,
        fidelity: None,
        purity,
        note: None,
    };
    let s = match effective_pure(&cfg.initial) {
        Some(s) => s,
        None => {
            out.note = Some(Error::NoPureStabilizedState.to_string());
            return out;
        }
    };
    let (value, zero, one) = match s {
        PureState::V | PureState::Minus => (v, Condition::VToZero, Condition::VToOne),
        PureState::Plus | PureState::D => (vu, Condition::VPlusU2ToZero, Condition::VPlusU2ToOne),
    };
    let Some(value) = value else {
        out.note = Some("no steady value within the horizon".into());
        return out;
    };
    out.condition = if value.abs() <= cfg.steady_tol {
        zero
    } else if (value - 1.0).abs() <= cfg.steady_tol {
        one
    } else {
        out.note = Some(format!("steady value {value:.4} is neither 0 nor 1"));
        return out;
    };
    if let Ok(p) = table1_lookup(&InitialState::Pure(s), out.condition) {
        out.predicted = Some(p);
        out.fidelity = Some(final_state.fidelity(p));
    }
    out
}

/// Run the full pipeline for one configuration.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    cfg.validate()?;
    let rho0 = cfg.initial.density()?;
    let green = solve_green(&cfg.model, &cfg.grid)?;
    let rates = rates_from_uv(&green);
    let rate_identity_error = rates.max_kappa_diff(&rates_simplified(&green));
    let mut failures = Vec::new();
    if rates.truncated {
        failures.push(format!(
            "rates: |u| below floor after t = {}",
            rates.t(rates.len().saturating_sub(1))
        ));
    }
    let switch_off = match detect_switch_off(&rates, cfg.switch_off_tol, cfg.switch_off_window) {
        Ok(r) => Some(r),
        Err(e) => {
            failures.push(format!("switch-off: {e}"));
            None
        }
    };
    let samples = 10usize;
    let spectrum_timeline = (0..=samples)
        .filter_map(|i| {
            let k = i * (rates.len().saturating_sub(1)) / samples;
            (k < rates.len()).then(|| {
                let (kappa, kappa_tilde) = (rates.kappa[k], rates.kappa_tilde[k]);
                let spectrum = spectrum(&build_lt(kappa, kappa_tilde));
                let df = classify_df_states(&spectrum, kappa, kappa_tilde);
                SpectrumSample {
                    t: rates.t(k),
                    kappa,
                    kappa_tilde,
                    spectrum,
                    df,
                }
            })
        })
        .collect();
    let late_df = late_classification(&rates, switch_off.as_ref());
    let propagation = propagate_exact(&rho0, &green, cfg.eps_minus)?;
    let ode_max_diff = match integrate_ode(&rho0, &rates, cfg.eps_minus) {
        Ok(ode) => Some(propagation.max_abs_diff(&ode)),
        Err(e) => {
            failures.push(format!("ode: {e}"));
            None
        }
    };
    let steady_v = steady_value(&green.v, STEADY_FRACTION, cfg.steady_tol);
    let vu: Vec<f64> = green.u.iter().zip(&green.v).map(|(u, v)| v + u.norm_sqr()).collect();
    let steady_v_plus_u2 = steady_value(&vu, STEADY_FRACTION, cfg.steady_tol);
    let verdict = verdict(cfg, propagation.last(), steady_v, steady_v_plus_u2);
    Ok(ScenarioReport {
        config: cfg.clone(),
        green,
        rates,
        rate_identity_error,
        switch_off,
        spectrum_timeline,
        late_df,
        propagation,
        ode_max_diff,
        steady_v,
        steady_v_plus_u2,
        verdict,
        failures,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Bias,
    Bandwidth,
}

impl std::str::FromStr for SweepParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bias" | "mu" => Ok(SweepParam::Bias),
            "bandwidth" | "d" => Ok(SweepParam::Bandwidth),
            other => Err(Error::Config(format!("unknown sweep parameter `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSummary {
    pub steady_v: Option<f64>,
    pub steady_v_plus_u2: Option<f64>,
    pub switch_off: Option<SwitchOffReport>,
    pub late_df: DfClass,
    pub verdict: StabilizationVerdict,
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub result: Result<SweepSummary>,
}

/// Independent scenarios with one parameter varied; rows keep the order of
/// `values`.
pub fn sweep(param: SweepParam, values: &[f64], base: &ScenarioConfig) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    Ok(values
        .par_iter()
        .map(|&value| {
            let result = (|| {
                let mut cfg = base.clone();
                match param {
                    SweepParam::Bias => cfg.model.mu = value,
                    SweepParam::Bandwidth => {
                        cfg.model.bandwidth = value;
                        cfg.model.validate()?;
                        if cfg.auto_horizon {
                            cfg.grid = TimeGrid::from_horizon(cfg.grid.dt, default_horizon(&cfg.model))?;
                        }
                    }
                }
                let r = run_scenario(&cfg)?;
                Ok(SweepSummary {
                    steady_v: r.steady_v,
                    steady_v_plus_u2: r.steady_v_plus_u2,
                    switch_off: r.switch_off,
                    late_df: r.late_df,
                    verdict: r.verdict,
                })
            })();
            SweepRow { value, result }
        })
        .collect())
}

/// Exact dynamics against the Born–Markov limit.
#[derive(Debug, Clone)]
pub struct BmComparison {
    /// Start of the comparison window (after the transient).
    pub t_from: f64,
    /// `max |u - u_BM| / |u_BM|`.
    pub u_rel: f64,
    /// `max |v - v_BM| / max(v_BM, 1)`, i.e. absolute for small occupations.
    pub v_dev: f64,
    /// `max |κ - κ_BM| / (J(ε₊)/2)`.
    pub kappa_dev: f64,
    /// `max |κ̃ - κ̃_BM| / (J(ε₊)/2)`.
    pub kappa_tilde_dev: f64,
    pub bm_rates: (f64, f64),
    pub bm_df: DfClass,
    pub exact_df: DfClass,
    pub df_match: bool,
}

pub fn bm_compare(cfg: &ScenarioConfig) -> Result<BmComparison> {
    bm_compare_from(cfg, 1.0)
}

pub fn bm_compare_from(cfg: &ScenarioConfig, t_from: f64) -> Result<BmComparison> {
    cfg.validate()?;
    let green = solve_green(&cfg.model, &cfg.grid)?;
    let rates = rates_from_uv(&green);
    let (kb, ktb) = bm_rates(&cfg.model);
    let half_j = 0.5 * cfg.model.j_at_level();
    let mut out = BmComparison {
        t_from,
        u_rel: 0.0,
        v_dev: 0.0,
        kappa_dev: 0.0,
        kappa_tilde_dev: 0.0,
        bm_rates: (kb, ktb),
        bm_df: classify_df_states(&spectrum(&build_lt(kb, ktb)), kb, ktb),
        exact_df: DfClass::None,
        df_match: false,
    };
    for k in 0..rates.len() {
        let t = green.grid.t(k);
        if t < t_from {
            continue;
        }
        let (ub, vb) = bm_green(&cfg.model, t);
        out.u_rel = out.u_rel.max((green.u[k] - ub).norm() / ub.norm());
        out.v_dev = out.v_dev.max((green.v[k] - vb).abs() / vb.abs().max(1.0));
        if half_j > 0.0 {
            out.kappa_dev = out.kappa_dev.max((rates.kappa[k] - kb).abs() / half_j);
            out.kappa_tilde_dev = out.kappa_tilde_dev.max((rates.kappa_tilde[k] - ktb).abs() / half_j);
        }
    }
    let switch = detect_switch_off(&rates, cfg.switch_off_tol, cfg.switch_off_window).ok();
    out.exact_df = late_classification(&rates, switch.as_ref());
    out.df_match =
        out.exact_df == out.bm_df || matches!((&out.exact_df, &out.bm_df), (DfClass::Mixed(_), DfClass::Mixed(_)));
    Ok(out)
}

/// Map a superposition in the original basis into the effective one.
pub fn superposition_from_original(phi: f64, c1: Complex64, c2: Complex64) -> InitialState {
    let (alpha, beta) = StateBasis::new(phi).from_original(c1, c2);
    InitialState::Superposition { alpha, beta }
}
