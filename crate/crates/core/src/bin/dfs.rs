// Copyright 2026 The dfs Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dfs_core::cli::{
    bm_text, emit_csv_to, exit_code, load_target, parse_override, stage, sweep_csv, Command, RunManifest,
    DEFAULT_PRECISION,
};
use dfs_core::error::{Error, Result};
use dfs_core::scenario::{bm_compare, run_scenario, sweep, SweepParam, PRESETS};

#[derive(Parser)]
#[command(
    name = "dfs",
    version,
    about = "Decoherence-free state stabilization in a double quantum dot"
)]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Significant digits in CSV output.
    #[arg(long, global = true, default_value_t = DEFAULT_PRECISION)]
    precision: usize,
    /// Replace a scenario value, e.g. `model.mu=-10`.
    #[arg(long = "override", global = true, value_parser = parse_kv)]
    overrides: Vec<(String, String)>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario file or a named preset.
    Run { target: String },
    /// Vary one parameter of a base scenario.
    Sweep {
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        values: Vec<f64>,
        /// Base scenario file or preset; defaults to fig3a with μ replaced.
        target: Option<String>,
    },
    /// Compare the exact dynamics with the Born–Markov limit.
    BmCompare { target: String },
    /// List the named presets.
    Presets,
}

fn parse_kv(s: &str) -> Result<(String, String), String> {
    parse_override(s).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dfs: {} stage failed: {e}", stage(&e));
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let (command, scenario) = match &cli.command {
        Cmd::Run { target } => (Command::Run, Some(target.clone())),
        Cmd::Sweep { target, .. } => (Command::Sweep, target.clone()),
        Cmd::BmCompare { target } => (Command::BmCompare, Some(target.clone())),
        Cmd::Presets => (Command::Presets, None),
    };
    let manifest = RunManifest {
        command,
        scenario,
        out_dir: cli.out,
        precision: cli.precision,
        overrides: cli.overrides,
    };
    if manifest.command == Command::Presets {
        for p in PRESETS {
            println!("{:<6} {}", p.name, p.description);
        }
        return Ok(());
    }
    manifest.prepare()?;
    let target = manifest.scenario.as_deref().unwrap_or("fig3a");
    let cfgs = load_target(target, &manifest.overrides)?;
    let multi = cfgs.len() > 1;
    match &cli.command {
        Cmd::Run { .. } => {
            let mut first_err = None;
            for cfg in &cfgs {
                let dir = if multi {
                    manifest.out_dir.join(&cfg.name)
                } else {
                    manifest.out_dir.clone()
                };
                match run_scenario(cfg).and_then(|r| {
                    for f in &r.failures {
                        eprintln!("dfs: {}: {f}", cfg.name);
                    }
                    emit_csv_to(&r, &dir, manifest.precision)
                }) {
                    Ok(paths) => {
                        for p in paths {
                            println!("{}", p.display());
                        }
                    }
                    Err(e) => {
                        eprintln!("dfs: {}: {} stage failed: {e}", cfg.name, stage(&e));
                        first_err.get_or_insert(e);
                    }
                }
            }
            first_err.map_or(Ok(()), Err)
        }
        Cmd::Sweep { param, values, .. } => {
            let param: SweepParam = param.parse()?;
            let base = cfgs.iter().find(|c| c.model.mu == 0.0).unwrap_or(&cfgs[0]);
            let rows = sweep(param, values, base)?;
            let path = manifest.out_dir.join("sweep.csv");
            std::fs::write(&path, sweep_csv(&rows, manifest.precision)).map_err(|e| Error::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            println!("{}", path.display());
            Ok(())
        }
        Cmd::BmCompare { .. } => {
            for cfg in &cfgs {
                let cmp = bm_compare(cfg)?;
                let text = bm_text(cfg, &cmp);
                let name = if multi {
                    format!("bm_compare_{}.txt", cfg.name)
                } else {
                    "bm_compare.txt".into()
                };
                let path = manifest.out_dir.join(name);
                std::fs::write(&path, &text).map_err(|e| Error::Io {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?;
                print!("{text}");
            }
            Ok(())
        }
        Cmd::Presets => Ok(()),
    }
}
