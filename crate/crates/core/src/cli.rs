// Copyright 2026 The dfs Authors
// SPDX-License-Identifier: Apache-2.0

//! Scenario files, run manifests and output writers behind the `dfs` binary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::greens::TimeGrid;
use crate::liouville::PureState;
use crate::rates::{DEFAULT_SWITCH_OFF_TOL, DEFAULT_SWITCH_OFF_WINDOW};
use crate::scenario::{
    default_horizon, BmComparison, InitialState, ScenarioConfig, ScenarioReport, SweepRow, DEFAULT_DT, REFERENCE_EPS0,
    STEADY_TOL,
};
use crate::spectral::{SpectralKind, SpectralModel};

pub const KNOWN_KEYS: &[&str] = &[
    "model.kind",
    "model.gamma",
    "model.d",
    "model.eps0",
    "model.mu",
    "model.T",
    "grid.dt",
    "grid.horizon",
    "init.state",
    "init.phi",
    "init.alpha",
    "init.beta",
    "switchoff.tol",
    "switchoff.window",
];

pub const CSV_HEADER: &str = "t,re_u,im_u,abs_u,v,v_plus_u2,eps_tilde,gamma,gamma_tilde,kappa,kappa_tilde,\
rho_vv,rho_pp,re_rho_pm,im_rho_pm,rho_mm,rho_dd,purity";

pub const DEFAULT_PRECISION: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Run,
    Sweep,
    BmCompare,
    Presets,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: Command,
    /// Scenario file path or preset name.
    pub scenario: Option<String>,
    pub out_dir: PathBuf,
    /// Significant digits in CSV cells.
    pub precision: usize,
    pub overrides: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new(command: Command, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            command,
            scenario: None,
            out_dir: out_dir.into(),
            precision: DEFAULT_PRECISION,
            overrides: Vec::new(),
        }
    }

    /// Checks override keys and precision, and creates the output directory.
    pub fn prepare(&self) -> Result<()> {
        if !(1..=17).contains(&self.precision) {
            return Err(Error::Config(format!("precision {} outside 1..=17", self.precision)));
        }
        for (k, _) in &self.overrides {
            if !KNOWN_KEYS.contains(&k.as_str()) {
                return Err(Error::Parse {
                    line: 0,
                    key: k.clone(),
                    message: "unknown key in override".into(),
                });
            }
        }
        fs::create_dir_all(&self.out_dir).map_err(|e| io_err(&self.out_dir, e))?;
        let meta = fs::metadata(&self.out_dir).map_err(|e| io_err(&self.out_dir, e))?;
        if meta.permissions().readonly() {
            return Err(Error::Io {
                path: self.out_dir.display().to_string(),
                message: "output directory is not writable".into(),
            });
        }
        Ok(())
    }
}

/// `key=value` as given on the command line.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{s}` is not key=value")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Evaluates `+ - * /`, parentheses, `sqrt(..)`, `√x` and `pi` over decimals.
struct Expr<'a> {
    s: &'a [u8],
    i: usize,
}

impl Expr<'_> {
    fn eval(text: &str) -> Option<f64> {
        let text = text.replace('√', "sqrt ");
        let mut p = Expr {
            s: text.as_bytes(),
            i: 0,
        };
        let v = p.sum()?;
        p.ws();
        (p.i == p.s.len() && v.is_finite()).then_some(v)
    }

    fn ws(&mut self) {
        while self.s.get(self.i).is_some_and(|c| c.is_ascii_whitespace()) {
            self.i += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.ws();
        if self.s.get(self.i) == Some(&c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Option<f64> {
        let mut v = self.product()?;
        loop {
            if self.eat(b'+') {
                v += self.product()?;
            } else if self.eat(b'-') {
                v -= self.product()?;
            } else {
                return Some(v);
            }
        }
    }

    fn product(&mut self) -> Option<f64> {
        let mut v = self.unary()?;
        loop {
            if self.eat(b'*') {
                v *= self.unary()?;
            } else if self.eat(b'/') {
                v /= self.unary()?;
            } else {
                return Some(v);
            }
        }
    }

    fn unary(&mut self) -> Option<f64> {
        if self.eat(b'-') {
            return Some(-self.unary()?);
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.atom()
    }

    fn atom(&mut self) -> Option<f64> {
        self.ws();
        if self.eat(b'(') {
            let v = self.sum()?;
            return self.eat(b')').then_some(v);
        }
        let rest = &self.s[self.i..];
        if rest.starts_with(b"sqrt") {
            self.i += 4;
            return Some(self.unary()?.sqrt());
        }
        if rest.starts_with(b"pi") {
            self.i += 2;
            return Some(std::f64::consts::PI);
        }
        let start = self.i;
        while let Some(&c) = self.s.get(self.i) {
            let exp_sign = (c == b'+' || c == b'-') && self.i > start && matches!(self.s[self.i - 1], b'e' | b'E');
            if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                self.i += 1;
            } else {
                break;
            }
        }
        std::str::from_utf8(&self.s[start..self.i]).ok()?.parse().ok()
    }
}

/// Parses a real value: a decimal or a small arithmetic expression.
pub fn parse_real(text: &str) -> Option<f64> {
    Expr::eval(text.trim())
}

/// Parses `re` or `re, im`.
pub fn parse_complex(text: &str) -> Option<Complex64> {
    match text.split_once(',') {
        Some((re, im)) => Some(Complex64::new(parse_real(re)?, parse_real(im)?)),
        None => Some(Complex64::new(parse_real(text)?, 0.0)),
    }
}

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn real(&self, key: &str) -> Result<Option<f64>> {
        let Some((line, raw)) = self.map.get(key) else {
            return Ok(None);
        };
        parse_real(raw).map(Some).ok_or_else(|| Error::Parse {
            line: *line,
            key: key.into(),
            message: format!("cannot parse `{raw}` as a number"),
        })
    }

    fn complex(&self, key: &str) -> Result<Option<Complex64>> {
        let Some((line, raw)) = self.map.get(key) else {
            return Ok(None);
        };
        parse_complex(raw).map(Some).ok_or_else(|| Error::Parse {
            line: *line,
            key: key.into(),
            message: format!("cannot parse `{raw}` as a complex number"),
        })
    }

    fn fail(&self, key: &str, e: Error) -> Error {
        let line = self.map.get(key).map_or(0, |(l, _)| *l);
        let message = match e {
            Error::InvalidModel(m) | Error::InvalidGrid(m) | Error::Config(m) => m,
            other => other.to_string(),
        };
        Error::Parse {
            line,
            key: key.into(),
            message,
        }
    }
}

/// Parses a scenario file; see [`parse_scenario_with_overrides`].
pub fn parse_scenario_file(text: &str) -> Result<ScenarioConfig> {
    parse_scenario_with_overrides(text, &[])
}

/// Line-oriented `key = value` with `#` comments. Overrides replace file
/// values and are reported as line 0.
pub fn parse_scenario_with_overrides(text: &str, overrides: &[(String, String)]) -> Result<ScenarioConfig> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body.split_once('=').ok_or_else(|| Error::Parse {
            line,
            key: body.into(),
            message: "expected `key = value`".into(),
        })?;
        let key = k.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::Parse {
                line,
                key,
                message: "unknown key".into(),
            });
        }
        if map.insert(key.clone(), (line, v.trim().to_string())).is_some() {
            return Err(Error::Parse {
                line,
                key,
                message: "duplicate key".into(),
            });
        }
    }
    for (k, v) in overrides {
        if !KNOWN_KEYS.contains(&k.as_str()) {
            return Err(Error::Parse {
                line: 0,
                key: k.clone(),
                message: "unknown key in override".into(),
            });
        }
        map.insert(k.clone(), (0, v.clone()));
    }
    let e = Entries { map };

    let kind = match e.map.get("model.kind").map(|(_, v)| v.to_ascii_lowercase()) {
        None => SpectralKind::Lorentzian,
        Some(k) if k == "lorentzian" => SpectralKind::Lorentzian,
        Some(k) if k == "wide-band" || k == "wideband" || k == "wide_band" => SpectralKind::WideBand,
        Some(k) => return Err(e.fail("model.kind", Error::Config(format!("unknown kind `{k}`")))),
    };
    let gamma = e.real("model.gamma")?.unwrap_or(1.0);
    let eps0 = e.real("model.eps0")?.unwrap_or(REFERENCE_EPS0);
    let mu = e.real("model.mu")?.unwrap_or(0.0);
    let temperature = e
        .real("model.T")?
        .ok_or_else(|| e.fail("model.T", Error::Config("temperature required".into())))?;
    let model = match kind {
        SpectralKind::Lorentzian => {
            let d = e
                .real("model.d")?
                .ok_or_else(|| e.fail("model.d", Error::Config("bandwidth required for a Lorentzian".into())))?;
            SpectralModel::lorentzian(gamma, d, eps0, mu, temperature)
        }
        SpectralKind::WideBand => {
            if e.map.contains_key("model.d") {
                return Err(e.fail("model.d", Error::Config("wide-band model takes no bandwidth".into())));
            }
            SpectralModel::wide_band(gamma, eps0, mu, temperature)
        }
    }
    .map_err(|err| {
        let key = match &err {
            Error::InvalidModel(m) if m.contains("temperature") => "model.T",
            Error::InvalidModel(m) if m.contains("bandwidth") => "model.d",
            Error::InvalidModel(m) if m.contains("Γ") || m.contains("gamma") => "model.gamma",
            _ => "model.kind",
        };
        e.fail(key, err)
    })?;

    let dt = e.real("grid.dt")?.unwrap_or(DEFAULT_DT);
    let horizon = e.real("grid.horizon")?;
    let grid = TimeGrid::from_horizon(dt, horizon.unwrap_or_else(|| default_horizon(&model)))
        .map_err(|err| e.fail(if horizon.is_some() { "grid.horizon" } else { "grid.dt" }, err))?;

    let alpha = e.complex("init.alpha")?;
    let beta = e.complex("init.beta")?;
    let initial = match (e.map.get("init.state"), alpha, beta) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
            return Err(e.fail(
                "init.state",
                Error::Config("give either init.state or init.alpha/beta".into()),
            ))
        }
        (Some((_, s)), None, None) => InitialState::Pure(
            PureState::parse(s).ok_or_else(|| e.fail("init.state", Error::Config(format!("unknown state `{s}`"))))?,
        ),
        (None, None, None) => InitialState::Pure(PureState::V),
        (None, a, b) => {
            let st = InitialState::Superposition {
                alpha: a.unwrap_or_default(),
                beta: b.unwrap_or_default(),
            };
            st.density().map_err(|err| e.fail("init.alpha", err))?;
            st
        }
    };
    let phi = e.real("init.phi")?.unwrap_or(0.0);

    let mut cfg = ScenarioConfig {
        name: "scenario".into(),
        eps_minus: model.center,
        model,
        grid,
        auto_horizon: horizon.is_none(),
        initial,
        phi,
        switch_off_tol: e.real("switchoff.tol")?.unwrap_or(DEFAULT_SWITCH_OFF_TOL),
        switch_off_window: e.real("switchoff.window")?.unwrap_or(DEFAULT_SWITCH_OFF_WINDOW),
        steady_tol: STEADY_TOL,
    };
    if cfg.switch_off_tol.is_nan() || cfg.switch_off_tol <= 0.0 {
        return Err(e.fail("switchoff.tol", Error::Config("must be > 0".into())));
    }
    if cfg.switch_off_window.is_nan() || cfg.switch_off_window < 0.0 {
        return Err(e.fail("switchoff.window", Error::Config("must be ≥ 0".into())));
    }
    if !phi.is_finite() {
        return Err(e.fail("init.phi", Error::Config("must be finite".into())));
    }
    cfg.validate()?;
    cfg.name = match cfg.model.kind {
        SpectralKind::Lorentzian => format!("d{}_mu{}", cfg.model.bandwidth, cfg.model.mu),
        SpectralKind::WideBand => format!("wb_mu{}", cfg.model.mu),
    };
    Ok(cfg)
}

/// Fixed significant-digit formatting.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{:.*e}", digits.saturating_sub(1), if x == 0.0 { 0.0 } else { x })
    }
}

/// Number of columns in [`CSV_HEADER`].
pub const CSV_COLUMNS: usize = 18;

/// One trajectory row in header order; rate cells past a truncation are `nan`.
pub fn trajectory_row(report: &ScenarioReport, k: usize) -> [f64; CSV_COLUMNS] {
    let g = &report.green;
    let r = &report.rates;
    let u = g.u[k];
    let rate = |s: &Vec<f64>| s.get(k).copied().unwrap_or(f64::NAN);
    let mut row = [f64::NAN; CSV_COLUMNS];
    row[..11].copy_from_slice(&[
        g.grid.t(k),
        u.re,
        u.im,
        u.norm(),
        g.v[k],
        g.v[k] + u.norm_sqr(),
        rate(&r.eps_tilde),
        rate(&r.gamma),
        rate(&r.gamma_tilde),
        rate(&r.kappa),
        rate(&r.kappa_tilde),
    ]);
    if let Some(s) = report.propagation.states.get(k) {
        row[11..].copy_from_slice(&[s.vv(), s.pp(), s.pm().re, s.pm().im, s.mm(), s.dd(), s.purity()]);
    }
    row
}

/// Full trajectory table.
pub fn trajectory_csv(report: &ScenarioReport, precision: usize) -> String {
    let n = report.green.len();
    let mut out = String::with_capacity(n * CSV_COLUMNS * (precision + 8));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for k in 0..n {
        for (i, c) in trajectory_row(report, k).iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&fmt_sig(*c, precision));
        }
        out.push('\n');
    }
    out
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".into(), |v| format!("{v:.6}"))
}

/// Human-readable summary.
pub fn report_text(report: &ScenarioReport) -> String {
    let c = &report.config;
    let m = &c.model;
    let mut s = String::new();
    let _ = writeln!(s, "scenario: {}", c.name);
    let kind = match m.kind {
        SpectralKind::Lorentzian => format!("lorentzian d={}", m.bandwidth),
        SpectralKind::WideBand => "wide-band".into(),
    };
    let _ = writeln!(
        s,
        "model: {kind} gamma={} eps0={} mu={} T={}",
        m.gamma, m.center, m.mu, m.temperature
    );
    let _ = writeln!(
        s,
        "grid: dt={} horizon={} nodes={}",
        c.grid.dt,
        c.grid.horizon(),
        c.grid.len()
    );
    let _ = writeln!(s, "initial state: {} (phi={})", c.initial.describe(), c.phi);
    match &report.switch_off {
        Some(so) => {
            let _ = writeln!(
                s,
                "switch-off: {} (tol={}, window={})",
                so.which, so.tolerance, so.window
            );
            let _ = writeln!(s, "t_s: {}", so.t_s.map_or_else(|| "n/a".into(), |t| format!("{t:.6}")));
        }
        None => {
            let _ = writeln!(s, "switch-off: unavailable");
        }
    }
    let _ = writeln!(s, "late-time DF states: {}", report.late_df.describe());
    let _ = writeln!(s, "steady v: {}", opt(report.steady_v));
    let _ = writeln!(s, "steady v+|u|^2: {}", opt(report.steady_v_plus_u2));
    let v = &report.verdict;
    let _ = writeln!(s, "condition: {}", v.condition);
    let _ = writeln!(
        s,
        "predicted DF state: {}",
        v.predicted.map_or_else(|| "none".into(), |p| p.to_string())
    );
    let _ = writeln!(s, "fidelity: {}", opt(v.fidelity));
    let _ = writeln!(s, "final purity: {:.6}", v.purity);
    if let Some(note) = &v.note {
        let _ = writeln!(s, "note: {note}");
    }
    let a = &report.green.audit;
    let _ = writeln!(
        s,
        "v audit: nodes={} max_diff={:.3e} imag_residue={:.3e} kernel_error={:.3e}",
        a.nodes.len(),
        a.max_abs_diff,
        a.max_imag_residue,
        a.kernel_error
    );
    let _ = writeln!(s, "rate identity error: {:.3e}", report.rate_identity_error);
    let _ = writeln!(
        s,
        "map vs ode: {}",
        report.ode_max_diff.map_or_else(|| "n/a".into(), |d| format!("{d:.3e}"))
    );
    let _ = writeln!(s, "trace drift: {:.3e}", report.propagation.trace_drift);
    let _ = writeln!(s, "spectrum timeline:");
    for sample in &report.spectrum_timeline {
        let ev: Vec<String> = sample.spectrum.eigenvalues.iter().map(|e| format!("{e:.6}")).collect();
        let _ = writeln!(
            s,
            "  t={:.3} kappa={:.6} kappa_tilde={:.6} eigenvalues=[{}]{} df={}",
            sample.t,
            sample.kappa,
            sample.kappa_tilde,
            ev.join(", "),
            if sample.spectrum.defective { " defective" } else { "" },
            sample.df.describe()
        );
    }
    for f in &report.failures {
        let _ = writeln!(s, "stage failure: {f}");
    }
    s
}

fn write(path: PathBuf, text: &str) -> Result<PathBuf> {
    fs::write(&path, text).map_err(|e| io_err(&path, e))?;
    Ok(path)
}

/// Writes `trajectory.csv` and `report.txt` into `dir`.
pub fn emit_csv_to(report: &ScenarioReport, dir: &Path, precision: usize) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    Ok(vec![
        write(dir.join("trajectory.csv"), &trajectory_csv(report, precision))?,
        write(dir.join("report.txt"), &report_text(report))?,
    ])
}

pub fn emit_csv(report: &ScenarioReport, manifest: &RunManifest) -> Result<Vec<PathBuf>> {
    emit_csv_to(report, &manifest.out_dir, manifest.precision)
}

pub fn sweep_csv(rows: &[SweepRow], precision: usize) -> String {
    let mut s = String::from("value,steady_v,steady_v_plus_u2,switch_off,t_s,df,condition,predicted,fidelity,error\n");
    let f = |x: Option<f64>| x.map_or_else(String::new, |v| fmt_sig(v, precision));
    for row in rows {
        let _ = write!(s, "{}", fmt_sig(row.value, precision));
        match &row.result {
            Ok(r) => {
                let _ = writeln!(
                    s,
                    ",{},{},{},{},\"{}\",{},{},{},",
                    f(r.steady_v),
                    f(r.steady_v_plus_u2),
                    r.switch_off.as_ref().map_or("", |so| so.which.as_str()),
                    f(r.switch_off.as_ref().and_then(|so| so.t_s)),
                    r.late_df.describe(),
                    r.verdict.condition,
                    r.verdict.predicted.map_or_else(String::new, |p| p.to_string()),
                    f(r.verdict.fidelity)
                );
            }
            Err(e) => {
                let _ = writeln!(s, ",,,,,,,,,\"{}\"", e.to_string().replace('"', "'"));
            }
        }
    }
    s
}

pub fn bm_text(cfg: &ScenarioConfig, cmp: &BmComparison) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scenario: {}", cfg.name);
    let _ = writeln!(s, "window: t >= {}", cmp.t_from);
    let _ = writeln!(
        s,
        "bm rates: kappa={:.6e} kappa_tilde={:.6e}",
        cmp.bm_rates.0, cmp.bm_rates.1
    );
    let _ = writeln!(s, "max relative deviation u: {:.6e}", cmp.u_rel);
    let _ = writeln!(s, "max deviation v: {:.6e}", cmp.v_dev);
    let _ = writeln!(s, "max deviation kappa / (J/2): {:.6e}", cmp.kappa_dev);
    let _ = writeln!(s, "max deviation kappa_tilde / (J/2): {:.6e}", cmp.kappa_tilde_dev);
    let _ = writeln!(s, "bm DF states: {}", cmp.bm_df.describe());
    let _ = writeln!(s, "exact DF states: {}", cmp.exact_df.describe());
    let _ = writeln!(s, "classification match: {}", cmp.df_match);
    s
}

/// Scenario from a preset name or a file path, with overrides applied.
pub fn load_target(target: &str, overrides: &[(String, String)]) -> Result<Vec<ScenarioConfig>> {
    if crate::scenario::PRESETS.iter().any(|p| p.name == target) {
        let mut cfgs = crate::scenario::preset(target)?;
        if !overrides.is_empty() {
            for cfg in &mut cfgs {
                *cfg = apply_overrides(cfg, overrides)?;
                cfg.name = format!("{target}_d{}_mu{}", cfg.model.bandwidth, cfg.model.mu);
            }
        }
        return Ok(cfgs);
    }
    let text = fs::read_to_string(target).map_err(|e| {
        Error::Config(format!(
            "`{target}` is neither a preset nor a readable scenario file: {e}"
        ))
    })?;
    let mut cfg = parse_scenario_with_overrides(&text, overrides)?;
    if let Some(stem) = Path::new(target).file_stem().and_then(|s| s.to_str()) {
        cfg.name = stem.to_string();
    }
    Ok(vec![cfg])
}

/// Serializes a configuration back to scenario-file form.
pub fn to_scenario_text(cfg: &ScenarioConfig) -> String {
    let m = &cfg.model;
    let mut s = String::new();
    match m.kind {
        SpectralKind::Lorentzian => {
            let _ = writeln!(s, "model.kind = lorentzian\nmodel.d = {:e}", m.bandwidth);
        }
        SpectralKind::WideBand => {
            let _ = writeln!(s, "model.kind = wide-band");
        }
    }
    let _ = writeln!(s, "model.gamma = {:e}\nmodel.eps0 = {:e}", m.gamma, m.center);
    let _ = writeln!(s, "model.mu = {:e}\nmodel.T = {:e}", m.mu, m.temperature);
    let _ = writeln!(s, "grid.dt = {:e}", cfg.grid.dt);
    if !cfg.auto_horizon {
        let _ = writeln!(s, "grid.horizon = {:e}", cfg.grid.horizon());
    }
    match cfg.initial {
        InitialState::Pure(p) => {
            let _ = writeln!(s, "init.state = {}", p.label());
        }
        InitialState::Superposition { alpha, beta } => {
            let _ = writeln!(
                s,
                "init.alpha = {:e}, {:e}\ninit.beta = {:e}, {:e}",
                alpha.re, alpha.im, beta.re, beta.im
            );
        }
    }
    let _ = writeln!(s, "init.phi = {:e}", cfg.phi);
    let _ = writeln!(
        s,
        "switchoff.tol = {:e}\nswitchoff.window = {:e}",
        cfg.switch_off_tol, cfg.switch_off_window
    );
    s
}

fn apply_overrides(cfg: &ScenarioConfig, overrides: &[(String, String)]) -> Result<ScenarioConfig> {
    // Overriding the initial state kind must drop the other form.
    let mut text = to_scenario_text(cfg);
    if overrides.iter().any(|(k, _)| k == "init.alpha" || k == "init.beta") {
        text = text
            .lines()
            .filter(|l| !l.starts_with("init.state"))
            .collect::<Vec<_>>()
            .join("\n");
    }
    if overrides.iter().any(|(k, _)| k == "init.state") {
        text = text
            .lines()
            .filter(|l| !l.starts_with("init.alpha") && !l.starts_with("init.beta"))
            .collect::<Vec<_>>()
            .join("\n");
    }
    let mut out = parse_scenario_with_overrides(&text, overrides)?;
    out.name = cfg.name.clone();
    Ok(out)
}

/// Process exit code for an error, grouped by stage.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::Config(_) | Error::InvalidModel(_) | Error::InvalidGrid(_) => 3,
        Error::Io { .. } => 5,
        _ => 4,
    }
}

/// Stage label used in diagnostics.
pub fn stage(e: &Error) -> &'static str {
    match e {
        Error::Parse { .. } | Error::Config(_) | Error::InvalidModel(_) | Error::InvalidGrid(_) => "config",
        Error::Io { .. } => "output",
        Error::DeltaKernel | Error::QuadratureNonConvergence { .. } => "kernel",
        Error::NonFinite { .. } | Error::ImaginaryResidue { .. } => "green",
        Error::SeriesTooShort { .. } => "rates",
        Error::Unphysical(_) | Error::MixedState { .. } => "propagate",
        Error::NoPureStabilizedState | Error::ConditionMismatch { .. } => "scenario",
    }
}
