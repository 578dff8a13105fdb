//! Command-line surface: `simulate`, `assimilate`, `constants` and
//! `spectrum`, each driven by one JSON configuration file.
//!
//! Exit codes: `0` success, `2` configuration or output-directory problems,
//! `3` numerical failures, `1` anything else (I/O).

mod commands;
mod config;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use log::info;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, FieldIssue, Result};
use crate::field::fmt_f64;

pub use commands::{
    constants_for, fit_window, prepare, prepare_output, run_assimilate, run_simulate,
    run_spectrum, sweep_dir, AssimilateReport, C0Row, ErrorSample, Feasibility, FitWindow,
    ObservationSetup, Prepared, SimulateReport, SpectrumReport, VelocityTracking,
    VELOCITY_SLACK,
};
pub use config::{
    parse_sweep, set_path, ForcingConfig, MuKeyword, MuSetting, OutputSection, ParamsConfig,
    RunConfig, SimulateSection, SpectrumSection, TheorySection, TwinSection,
};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "PGNUDGE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "pgnudge", version, about = "PG ocean model with temperature-only nudging")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct CommonArgs {
    /// JSON configuration file; defaults apply to missing keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write into a non-empty output directory.
    #[arg(long)]
    pub force: bool,
    /// Global seed (overrides `seed`).
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reference run only: scalar series and snapshots.
    Simulate(CommonArgs),
    /// Twin experiment with nudging.
    Assimilate {
        #[command(flatten)]
        common: CommonArgs,
        /// `KEY=v1,v2,...` over a dotted config path.
        #[arg(long)]
        sweep: Option<String>,
    },
    /// Print the theorem constants as JSON.
    Constants {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        sweep: Option<String>,
    },
    /// Modal basis listing and measured approximation constant.
    Spectrum(CommonArgs),
}

/// Worker count: `PGNUDGE_THREADS` if set, else up to two.
pub fn workers() -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        Some(n) => n.max(1),
        None => available.min(2),
    }
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::OutputNotEmpty(_) | Error::Json(_) => 2,
        e if e.is_numerical() => 3,
        _ => 1,
    }
}

fn load_value(common: &CommonArgs) -> Result<Value> {
    let mut value = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::Config(vec![FieldIssue::new(
                    "config",
                    format!("cannot read {}: {e}", path.display()),
                )])
            })?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Config(vec![FieldIssue::new("config", e.to_string())]))?
        }
        None => Value::Object(Default::default()),
    };
    if let Some(seed) = common.seed {
        set_path(&mut value, "seed", Value::from(seed))?;
    }
    Ok(value)
}

fn output_dir(common: &CommonArgs, cfg: &RunConfig) -> PathBuf {
    common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&cfg.output.dir))
}

/// Configurations for each sweep value, or the single configuration.
fn expand(value: Value, sweep: Option<&str>) -> Result<Vec<(Option<Value>, RunConfig)>> {
    let Some(spec) = sweep else {
        return Ok(vec![(None, RunConfig::from_value(value)?)]);
    };
    let (key, values) = parse_sweep(spec)?;
    let mut issues = Vec::new();
    let mut out = Vec::new();
    for v in values {
        let mut tree = value.clone();
        set_path(&mut tree, &key, v.clone())?;
        match RunConfig::from_value(tree) {
            Ok(cfg) => out.push((Some(v), cfg)),
            Err(Error::Config(mut found)) => {
                for issue in &mut found {
                    issue.message = format!("{} (sweep {key}={v})", issue.message);
                }
                issues.append(&mut found);
            }
            Err(e) => return Err(e),
        }
    }
    if issues.is_empty() {
        Ok(out)
    } else {
        Err(Error::Config(issues))
    }
}

#[derive(Serialize)]
struct SweepConstants<'a> {
    key: &'a str,
    value: Value,
    constants: crate::assimilate::TheoremConstants,
}

/// Runs a parsed command line; returns the process exit status.
pub fn run(cli: Cli) -> i32 {
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(common) => {
            let cfg = RunConfig::from_value(load_value(&common)?)?;
            let out = output_dir(&common, &cfg);
            prepare_output(&out, common.force)?;
            let report = run_simulate(&cfg, &out)?;
            info!("simulate: {} steps written to {}", report.steps, out.display());
            Ok(())
        }
        Command::Assimilate { common, sweep } => {
            let runs = expand(load_value(&common)?, sweep.as_deref())?;
            let out = output_dir(&common, &runs[0].1);
            prepare_output(&out, common.force)?;
            if sweep.is_none() {
                let report = run_assimilate(&runs[0].1, &out, workers())?;
                log_summary(&report);
                return Ok(());
            }
            let key = parse_sweep(sweep.as_deref().unwrap_or_default())?.0;
            let mut table = csv::Writer::from_writer(Vec::new());
            table.write_record([
                "index", "key", "value", "mu", "rate", "goodness", "initial_l2_chi",
                "final_l2_chi",
            ])?;
            for (i, (value, cfg)) in runs.iter().enumerate() {
                let dir = sweep_dir(&out, i);
                prepare_output(&dir, common.force)?;
                let report = run_assimilate(cfg, &dir, workers())?;
                log_summary(&report);
                let fit = report.decay_fit;
                table.write_record([
                    i.to_string(),
                    key.clone(),
                    value.as_ref().map(Value::to_string).unwrap_or_default(),
                    fmt_f64(report.mu),
                    fmt_f64(fit.map_or(f64::NAN, |f| f.rate)),
                    fmt_f64(fit.map_or(f64::NAN, |f| f.goodness)),
                    fmt_f64(report.initial.l2_chi),
                    fmt_f64(report.last.l2_chi),
                ])?;
            }
            let bytes = table
                .into_inner()
                .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
            std::fs::write(out.join("sweep.csv"), bytes)?;
            Ok(())
        }
        Command::Constants { common, sweep } => {
            let runs = expand(load_value(&common)?, sweep.as_deref())?;
            let text = if let Some(spec) = sweep.as_deref() {
                let key = parse_sweep(spec)?.0;
                let mut rows = Vec::new();
                for (value, cfg) in runs {
                    rows.push(SweepConstants {
                        key: &key,
                        value: value.unwrap_or(Value::Null),
                        constants: constants_for(&cfg)?,
                    });
                }
                serde_json::to_string_pretty(&rows)?
            } else {
                serde_json::to_string_pretty(&constants_for(&runs[0].1)?)?
            };
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}")?;
            Ok(())
        }
        Command::Spectrum(common) => {
            let cfg = RunConfig::from_value(load_value(&common)?)?;
            let out = output_dir(&common, &cfg);
            prepare_output(&out, common.force)?;
            let report = run_spectrum(&cfg, &out)?;
            info!(
                "spectrum: {} modes, c0 = {:?}",
                report.mode_count,
                report.c0.iter().map(|r| r.c0).collect::<Vec<_>>()
            );
            Ok(())
        }
    }
}

fn log_summary(report: &AssimilateReport) {
    match &report.decay_fit {
        Some(fit) => info!(
            "assimilate: mu = {}, rate = {:.4}, goodness = {:.6}, final |chi| = {:.3e}",
            report.mu, fit.rate, fit.goodness, report.last.l2_chi
        ),
        None => info!(
            "assimilate: mu = {}, no decay fit ({}), final |chi| = {:.3e}",
            report.mu,
            report.decay_fit_error.as_deref().unwrap_or("?"),
            report.last.l2_chi
        ),
    }
}

/// Loads a configuration file the way the command line does.
pub fn load_config(path: &Path, seed: Option<u64>) -> Result<RunConfig> {
    RunConfig::from_value(load_value(&CommonArgs {
        config: Some(path.to_path_buf()),
        out: None,
        force: false,
        seed,
    })?)
}
