use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use serde::Serialize;

use crate::assimilate::{
    alpha_proxy, fit_decay_rate, gronwall_check, run_twin_with, theorem_constants,
    velocity_ratio_bound, DecayFit, ErrorSeries, GronwallReport, TheoremConstants, FIT_CEILING,
    FIT_FLOOR,
};
use crate::diagnostic::DiagnosticSolver;
use crate::error::{Error, Result};
use crate::field::snapshot::write_snapshot;
use crate::field::{energy_norm, fmt_f64, h1_norm_2d, l2_norm, PhysParams};
use crate::observe::{build_modal_basis, measure_c0, InterpolantKind};
use crate::stepper::{ForcingSpec, Stepper};

use super::config::RunConfig;

/// Slack on the velocity-tracking bound `‖v - u‖_{H¹} ≤ slack · ρ |χ|`.
pub const VELOCITY_SLACK: f64 = 1.1;

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Refuses a non-empty directory unless `force`; creates it otherwise.
pub fn prepare_output(dir: &Path, force: bool) -> Result<()> {
    if dir.exists() {
        let non_empty = fs::read_dir(dir)?.next().is_some();
        if non_empty && !force {
            return Err(Error::OutputNotEmpty(dir.display().to_string()));
        }
    }
    fs::create_dir_all(dir)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

/// Measured observation constants shared by every command.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObservationSetup {
    pub measured_c0: f64,
    pub lambda1: f64,
    pub c0_samples: usize,
    pub c0_seed: u64,
}

fn observation_setup(cfg: &RunConfig, p: &PhysParams) -> Result<ObservationSetup> {
    let d = cfg.domain;
    let basis = build_modal_basis(d, p, cfg.interpolant.h)?;
    Ok(ObservationSetup {
        measured_c0: measure_c0(&cfg.interpolant, d, p, cfg.theory.c0_samples, cfg.seed)?,
        lambda1: basis.lambda1,
        c0_samples: cfg.theory.c0_samples,
        c0_seed: cfg.seed,
    })
}

/// Forcing, resolved `μ`, observation constants and theorem constants.
pub struct Prepared {
    pub forcing: ForcingSpec,
    pub params: PhysParams,
    pub mu_from_heuristic: bool,
    pub observation: ObservationSetup,
    pub constants: TheoremConstants,
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    let forcing = cfg.forcing()?;
    let (params, mu_from_heuristic) = cfg.resolved_params(&forcing)?;
    let observation = observation_setup(cfg, &params)?;
    let constants = theorem_constants(
        &params,
        &forcing,
        &cfg.interpolant,
        observation.measured_c0,
        cfg.theory.c,
        cfg.theory.r,
        observation.lambda1,
    )?;
    Ok(Prepared {
        forcing,
        params,
        mu_from_heuristic,
        observation,
        constants,
    })
}

/// Theorem constants for the configuration, as printed by `constants`.
pub fn constants_for(cfg: &RunConfig) -> Result<TheoremConstants> {
    Ok(prepare(cfg)?.constants)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorSample {
    pub time: f64,
    pub l2_chi: f64,
    #[serde(rename = "h1_U")]
    pub h1_u: f64,
    pub l2_ref: f64,
}

impl ErrorSample {
    fn at(series: &ErrorSeries, i: usize) -> Self {
        Self {
            time: series.times[i],
            l2_chi: series.l2_chi[i],
            h1_u: series.h1_u[i],
            l2_ref: series.l2_ref[i],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitWindow {
    pub floor: f64,
    pub ceiling: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VelocityTracking {
    /// Empirical bound on `‖U‖_{H¹} / |χ|`.
    pub rho: f64,
    pub rho_samples: usize,
    pub slack: f64,
    /// Largest `‖v - u‖_{H¹} / |χ|` along the run (samples with `χ ≠ 0`).
    pub max_ratio: f64,
    pub within_bound: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Feasibility {
    pub mu_condition: bool,
    pub smallness_condition: bool,
    pub feasible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepCounts {
    pub spin_up: usize,
    pub assimilation: usize,
}

/// Contents of `report.json` for `assimilate`; deterministic given the
/// configuration.
#[derive(Debug, Clone, Serialize)]
pub struct AssimilateReport {
    pub command: &'static str,
    pub version: &'static str,
    pub config: RunConfig,
    pub mu: f64,
    pub mu_from_heuristic: bool,
    /// `μ = 0`: the run is the unassimilated comparison baseline.
    pub no_assimilation: bool,
    pub observation: ObservationSetup,
    pub constants: TheoremConstants,
    pub feasibility: Feasibility,
    pub fit_window: FitWindow,
    pub decay_fit: Option<DecayFit>,
    pub decay_fit_error: Option<String>,
    pub initial: ErrorSample,
    #[serde(rename = "final")]
    pub last: ErrorSample,
    /// Final `|χ|` over `|T̃|` at the start of assimilation.
    pub final_relative_error: f64,
    pub velocity: VelocityTracking,
    pub gronwall: Option<GronwallReport>,
    pub gronwall_error: Option<String>,
    pub steps: StepCounts,
}

#[derive(Debug, Clone, Copy, Serialize)]
struct Timings {
    prepare_s: f64,
    setup_s: f64,
    spin_up_s: f64,
    assimilation_s: f64,
    analysis_s: f64,
    total_s: f64,
}

/// Fit window for a run: the nudged window, or the whole series for the
/// unassimilated baseline, whose error never reaches the nudged ceiling.
pub fn fit_window(mu: f64) -> FitWindow {
    if mu > 0.0 {
        FitWindow {
            floor: FIT_FLOOR,
            ceiling: FIT_CEILING,
        }
    } else {
        FitWindow {
            floor: FIT_FLOOR,
            ceiling: 1.0,
        }
    }
}

/// Runs a twin experiment and writes `error_series.csv`, `report.json`,
/// `timings.json` and final snapshots into `out`.
pub fn run_assimilate(cfg: &RunConfig, out: &Path, workers: usize) -> Result<AssimilateReport> {
    let total = Instant::now();
    let clock = Instant::now();
    let prep = prepare(cfg)?;
    let prepare_s = clock.elapsed().as_secs_f64();
    let mu = prep.params.mu;
    info!("assimilate: mu = {mu} (heuristic: {})", prep.mu_from_heuristic);

    let twin = cfg.twin_config(prep.params, prep.forcing.clone());
    let outcome = run_twin_with(&twin, workers)?;
    let series = &outcome.series;

    let clock = Instant::now();
    let window = fit_window(mu);
    let (decay_fit, decay_fit_error) = match fit_decay_rate(series, window.floor, window.ceiling) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };

    let solver = DiagnosticSolver::new(cfg.domain, &prep.params, cfg.solver)?;
    let rho = velocity_ratio_bound(&solver, &prep.params, cfg.theory.rho_samples, cfg.seed)?;
    let max_ratio = series
        .l2_chi
        .iter()
        .zip(&series.h1_u)
        .filter(|(c, _)| **c > 0.0)
        .map(|(c, u)| u / c)
        .fold(0.0f64, f64::max);
    let within_bound = series
        .l2_chi
        .iter()
        .zip(&series.h1_u)
        .all(|(c, u)| *u <= VELOCITY_SLACK * rho * c);

    let y: Vec<f64> = series.l2_chi.iter().map(|c| c * c).collect();
    let tstar_h1 = h1_norm_2d(&prep.forcing.tstar)?;
    let alpha = alpha_proxy(mu, cfg.theory.c_proxy, &series.energy_ref, tstar_h1);
    let beta = vec![0.0; y.len()];
    let (gronwall, gronwall_error) = match gronwall_check(
        &series.times,
        &y,
        &alpha,
        &beta,
        cfg.theory.gronwall_tau,
        cfg.theory.gronwall_gamma,
    ) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let analysis_s = clock.elapsed().as_secs_f64();

    let initial = ErrorSample::at(series, 0);
    let last = ErrorSample::at(series, series.len() - 1);
    let k = prep.constants;
    let report = AssimilateReport {
        command: "assimilate",
        version: VERSION,
        config: cfg.clone(),
        mu,
        mu_from_heuristic: prep.mu_from_heuristic,
        no_assimilation: mu == 0.0,
        observation: prep.observation,
        constants: k,
        feasibility: Feasibility {
            mu_condition: k.mu_condition,
            smallness_condition: k.smallness_condition,
            feasible: k.feasible,
        },
        fit_window: window,
        decay_fit,
        decay_fit_error,
        initial,
        last,
        final_relative_error: if initial.l2_ref > 0.0 {
            last.l2_chi / initial.l2_ref
        } else {
            last.l2_chi
        },
        velocity: VelocityTracking {
            rho,
            rho_samples: cfg.theory.rho_samples,
            slack: VELOCITY_SLACK,
            max_ratio,
            within_bound,
        },
        gronwall,
        gronwall_error,
        steps: StepCounts {
            spin_up: twin.spin_up_steps(),
            assimilation: outcome.steps,
        },
    };

    let mut csv = Vec::new();
    series.write_csv_to(&mut csv)?;
    fs::write(out.join("error_series.csv"), csv)?;
    let snaps = out.join("snapshots");
    fs::create_dir_all(&snaps)?;
    let t = outcome.reference.time;
    let u_err = outcome.assimilated.diag.u.sub(&outcome.reference.diag.u);
    write_snapshot(&snaps, "chi", "chi", t, &outcome.final_chi())?;
    write_snapshot(&snaps, "U1", "U1", t, &u_err.u1)?;
    write_snapshot(&snaps, "U2", "U2", t, &u_err.u2)?;
    write_snapshot(&snaps, "T_ref", "T_ref", t, &outcome.reference.ttilde)?;
    write_snapshot(&snaps, "eta", "eta", t, &outcome.assimilated.ttilde)?;
    write_json(&out.join("report.json"), &report)?;
    write_json(
        &out.join("timings.json"),
        &Timings {
            prepare_s,
            setup_s: outcome.timings.setup_s,
            spin_up_s: outcome.timings.spin_up_s,
            assimilation_s: outcome.timings.assimilation_s,
            analysis_s,
            total_s: total.elapsed().as_secs_f64(),
        },
    )?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateReport {
    pub command: &'static str,
    pub version: &'static str,
    pub config: RunConfig,
    pub steps: usize,
    pub final_time: f64,
    pub final_l2_t: f64,
    pub final_energy_t: f64,
    pub max_cfl: f64,
}

/// Reference-only run: `scalars.csv`, temperature snapshots, final
/// velocity, `report.json` and `timings.json`.
pub fn run_simulate(cfg: &RunConfig, out: &Path) -> Result<SimulateReport> {
    let total = Instant::now();
    let forcing = cfg.forcing()?;
    let (mut params, _) = cfg.resolved_params(&forcing)?;
    params.mu = 0.0;
    let d = cfg.domain;
    let stepper = Stepper::new(d, &params, cfg.stepper, cfg.solver)?;
    let snaps = out.join("snapshots");
    fs::create_dir_all(&snaps)?;

    let dt = cfg.stepper.dt;
    let n_steps = ((cfg.simulate.t_end / dt).round() as usize).max(1);
    let mut state = stepper.initial_state(cfg.reference.field(d), 0.0, &forcing)?;
    let mut csv = csv::Writer::from_writer(Vec::new());
    csv.write_record([
        "time",
        "l2_T",
        "energy_T",
        "cfl",
        "diag_iters",
        "constraint_residual",
    ])?;
    let mut max_cfl = 0.0f64;
    let every = cfg.simulate.snapshot_every;
    for n in 0..=n_steps {
        if n > 0 {
            state = stepper.step(&state, &forcing, None)?;
            max_cfl = max_cfl.max(state.cfl);
        }
        if n % cfg.simulate.sample_every == 0 || n == n_steps {
            csv.write_record([
                fmt_f64(n as f64 * dt),
                fmt_f64(l2_norm(&state.ttilde)?),
                fmt_f64(energy_norm(&state.ttilde, &params)?),
                fmt_f64(state.cfl),
                state.diag.iterations.to_string(),
                fmt_f64(state.diag.constraint_residual),
            ])?;
        }
        if (every > 0 && n % every == 0) || n == n_steps {
            let stem = format!("T_{n:06}");
            write_snapshot(&snaps, &stem, "T", n as f64 * dt, &state.ttilde)?;
        }
    }
    let bytes = csv
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    fs::write(out.join("scalars.csv"), bytes)?;
    let t = n_steps as f64 * dt;
    write_snapshot(&snaps, "u1", "u1", t, &state.diag.u.u1)?;
    write_snapshot(&snaps, "u2", "u2", t, &state.diag.u.u2)?;
    let report = SimulateReport {
        command: "simulate",
        version: VERSION,
        config: cfg.clone(),
        steps: n_steps,
        final_time: t,
        final_l2_t: l2_norm(&state.ttilde)?,
        final_energy_t: energy_norm(&state.ttilde, &params)?,
        max_cfl,
    };
    write_json(&out.join("report.json"), &report)?;
    write_json(
        &out.join("timings.json"),
        &serde_json::json!({ "total_s": total.elapsed().as_secs_f64() }),
    )?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct C0Row {
    pub refinement: usize,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub c0: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub kind: InterpolantKind,
    pub h: f64,
    pub samples: usize,
    pub seed: u64,
    pub mode_count: usize,
    pub lambda1: f64,
    pub c0: Vec<C0Row>,
}

/// Writes `basis.csv` (modal kind) and `c0.json` with `c₀` per refinement.
pub fn run_spectrum(cfg: &RunConfig, out: &Path) -> Result<SpectrumReport> {
    let forcing = cfg.forcing()?;
    let (params, _) = cfg.resolved_params(&forcing)?;
    let spec = cfg.interpolant;
    let basis = build_modal_basis(cfg.domain, &params, spec.h)?;
    if spec.kind == InterpolantKind::Modal {
        basis.write_csv(&out.join("basis.csv"))?;
    }
    let mut rows = Vec::new();
    for &factor in &cfg.spectrum.refinements {
        let d = cfg.domain.refined(factor);
        rows.push(C0Row {
            refinement: factor,
            nx: d.nx,
            ny: d.ny,
            nz: d.nz,
            c0: measure_c0(&spec, d, &params, cfg.theory.c0_samples, cfg.seed)?,
        });
    }
    let report = SpectrumReport {
        kind: spec.kind,
        h: spec.h,
        samples: cfg.theory.c0_samples,
        seed: cfg.seed,
        mode_count: basis.mode_count(),
        lambda1: basis.lambda1,
        c0: rows,
    };
    write_json(&out.join("c0.json"), &report)?;
    Ok(report)
}

/// Subdirectory of one sweep member.
pub fn sweep_dir(out: &Path, index: usize) -> PathBuf {
    out.join(format!("sweep_{index:03}"))
}
