//! Twin experiments: a reference run observed through `I_h` and a nudged
//! copy started from an arbitrary state.

use std::io::Write;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::diagnostic::SolverSettings;
use crate::error::{Error, FieldIssue, Result};
use crate::field::{energy_norm, fmt_f64, h1_norm, l2_norm, DomainSpec, PhysParams, ScalarField3D};
use crate::observe::{Interpolant, InterpolantSpec, SmoothSampler};
use crate::stepper::{ForcingSpec, ModelState, Stepper, StepperSettings};

/// Largest admissible `dt · μ` for the explicit nudging term.
pub const MAX_DT_MU: f64 = 0.5;

/// Initial state of the assimilated copy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Eta0Mode {
    Zero,
    /// Seeded smooth random field with the reference's L² norm.
    Random { seed: u64 },
    /// Reference state plus `epsilon` times a unit smooth perturbation;
    /// `epsilon = 0` copies the reference exactly.
    Perturbed { epsilon: f64 },
}

/// Low cosine modes `cos(kx π x/Lx) cos(ky π y/Ly) cos(m π (z+H)/H)` with
/// `kx, ky, m ≤ max_mode` and seeded normal amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceInit {
    pub amplitude: f64,
    pub max_mode: usize,
    pub seed: u64,
}

impl Default for ReferenceInit {
    fn default() -> Self {
        Self {
            amplitude: 0.1,
            max_mode: 2,
            seed: 7,
        }
    }
}

impl ReferenceInit {
    pub fn field(&self, d: DomainSpec) -> ScalarField3D {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let m = self.max_mode;
        let mut amps = Vec::with_capacity((m + 1).pow(3));
        for kx in 0..=m {
            for ky in 0..=m {
                for kz in 0..=m {
                    let a: f64 = StandardNormal.sample(&mut rng);
                    amps.push((kx, ky, kz, self.amplitude * a));
                }
            }
        }
        let pi = std::f64::consts::PI;
        ScalarField3D::from_fn(d, |x, y, z| {
            amps.iter()
                .map(|&(kx, ky, kz, a)| {
                    a * (kx as f64 * pi * x / d.lx).cos()
                        * (ky as f64 * pi * y / d.ly).cos()
                        * (kz as f64 * pi * (z + d.h) / d.h).cos()
                })
                .sum()
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwinConfig {
    pub domain: DomainSpec,
    /// `params.mu` is the nudging strength.
    pub params: PhysParams,
    pub forcing: ForcingSpec,
    pub stepper: StepperSettings,
    pub solver: SolverSettings,
    pub interpolant: InterpolantSpec,
    pub reference: ReferenceInit,
    pub spin_up_time: f64,
    pub assimilation_time: f64,
    pub eta0: Eta0Mode,
    /// Seed of the perturbation direction for [`Eta0Mode::Perturbed`].
    pub seed: u64,
    /// Steps between recorded samples.
    pub sample_every: usize,
    /// Steps between observations; the nudging uses the latest one. The
    /// convergence theory covers only `1`.
    pub obs_stride: usize,
}

impl TwinConfig {
    pub fn validate(&self) -> Result<()> {
        let mut issues = Vec::new();
        self.validate_into(&mut issues);
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(issues))
        }
    }

    pub fn validate_into(&self, issues: &mut Vec<FieldIssue>) {
        for (name, v) in [
            ("twin.spin_up_time", self.spin_up_time),
            ("twin.assimilation_time", self.assimilation_time),
        ] {
            if !(v.is_finite() && v > 0.0) {
                issues.push(FieldIssue::new(name, format!("must be finite and > 0 (got {v})")));
            }
        }
        let mu = self.params.mu;
        if !(mu.is_finite() && mu >= 0.0) {
            issues.push(FieldIssue::new("params.mu", format!("must be finite and >= 0 (got {mu})")));
        } else if self.stepper.dt * mu > MAX_DT_MU {
            issues.push(FieldIssue::new(
                "params.mu",
                format!(
                    "dt * mu = {} exceeds {MAX_DT_MU}",
                    self.stepper.dt * mu
                ),
            ));
        }
        if self.sample_every == 0 {
            issues.push(FieldIssue::new("twin.sample_every", "must be >= 1"));
        }
        if self.obs_stride == 0 {
            issues.push(FieldIssue::new("twin.obs_stride", "must be >= 1"));
        }
        if let Eta0Mode::Perturbed { epsilon } = self.eta0 {
            if !epsilon.is_finite() {
                issues.push(FieldIssue::new("twin.eta0.epsilon", "must be finite"));
            }
        }
        if !(self.reference.amplitude.is_finite() && self.reference.amplitude >= 0.0) {
            issues.push(FieldIssue::new("twin.reference.amplitude", "must be finite and >= 0"));
        }
        if (self.params.depth - self.domain.h).abs() > 1e-12 * self.domain.h {
            issues.push(FieldIssue::new("params.H", "must equal domain.h"));
        }
    }

    pub fn spin_up_steps(&self) -> usize {
        steps_for(self.spin_up_time, self.stepper.dt)
    }

    pub fn assimilation_steps(&self) -> usize {
        steps_for(self.assimilation_time, self.stepper.dt)
    }
}

fn steps_for(t: f64, dt: f64) -> usize {
    ((t / dt).round() as usize).max(1)
}

/// Error diagnostics at the recorded samples; times are measured from the
/// start of assimilation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErrorSeries {
    pub times: Vec<f64>,
    /// `|η - T̃|`.
    pub l2_chi: Vec<f64>,
    /// `‖v - u‖_{H¹}`.
    pub h1_u: Vec<f64>,
    /// `|T̃|`.
    pub l2_ref: Vec<f64>,
    /// Energy norm `‖T̃‖` of the reference, for the Grönwall rate proxy.
    pub energy_ref: Vec<f64>,
}

impl ErrorSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// CSV with columns `time,l2_chi,h1_U,l2_ref`.
    pub fn write_csv_to<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["time", "l2_chi", "h1_U", "l2_ref"])?;
        for i in 0..self.len() {
            out.write_record([
                fmt_f64(self.times[i]),
                fmt_f64(self.l2_chi[i]),
                fmt_f64(self.h1_u[i]),
                fmt_f64(self.l2_ref[i]),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Wall-clock seconds per phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct TwinTimings {
    pub setup_s: f64,
    pub spin_up_s: f64,
    pub assimilation_s: f64,
}

#[derive(Debug, Clone)]
pub struct TwinOutcome {
    pub series: ErrorSeries,
    /// Reference at the start of assimilation.
    pub reference_start: ModelState,
    pub reference: ModelState,
    pub assimilated: ModelState,
    pub steps: usize,
    pub timings: TwinTimings,
}

impl TwinOutcome {
    /// Final temperature error `χ = η - T̃`.
    pub fn final_chi(&self) -> ScalarField3D {
        self.assimilated.ttilde.sub(&self.reference.ttilde)
    }
}

/// Runs the twin experiment on one worker.
pub fn run_twin(cfg: &TwinConfig) -> Result<TwinOutcome> {
    run_twin_with(cfg, 1)
}

/// Runs the twin experiment; with `workers >= 2` the two trajectories
/// advance on separate threads, joined once per step. Results do not
/// depend on `workers`.
pub fn run_twin_with(cfg: &TwinConfig, workers: usize) -> Result<TwinOutcome> {
    cfg.validate()?;
    let clock = Instant::now();
    let d = cfg.domain;
    let p = cfg.params;
    let stepper = Stepper::new(d, &p, cfg.stepper, cfg.solver)?;
    let ih = Interpolant::new(&cfg.interpolant, d, &p)?;
    let forcing = &cfg.forcing;
    let setup_s = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let mut reference = stepper.initial_state(cfg.reference.field(d), 0.0, forcing)?;
    for _ in 0..cfg.spin_up_steps() {
        reference = stepper.step(&reference, forcing, None)?;
    }
    let spin_up_s = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let mut assimilated = initial_eta(cfg, &stepper, &reference)?;
    let reference_start = reference.clone();
    let mut series = ErrorSeries::default();
    record(&mut series, 0.0, &reference, &assimilated, &p)?;

    let dt = cfg.stepper.dt;
    let n_steps = cfg.assimilation_steps();
    let mut observed = ih.apply(&reference.ttilde)?;
    for n in 0..n_steps {
        if n % cfg.obs_stride == 0 && n > 0 {
            observed = ih.apply(&reference.ttilde)?;
        }
        let nudge = if p.mu > 0.0 {
            Some(ih.apply(&assimilated.ttilde)?.sub(&observed).scaled(-p.mu))
        } else {
            None
        };
        let (r, a) = if workers >= 2 {
            std::thread::scope(|s| {
                let r = s.spawn(|| stepper.step(&reference, forcing, None));
                let a = stepper.step(&assimilated, forcing, nudge.as_ref());
                (r.join().expect("reference worker panicked"), a)
            })
        } else {
            (
                stepper.step(&reference, forcing, None),
                stepper.step(&assimilated, forcing, nudge.as_ref()),
            )
        };
        reference = r?;
        assimilated = a?;
        let done = n + 1;
        if done % cfg.sample_every == 0 || done == n_steps {
            record(&mut series, done as f64 * dt, &reference, &assimilated, &p)?;
        }
    }
    Ok(TwinOutcome {
        series,
        reference_start,
        reference,
        assimilated,
        steps: n_steps,
        timings: TwinTimings {
            setup_s,
            spin_up_s,
            assimilation_s: clock.elapsed().as_secs_f64(),
        },
    })
}

fn initial_eta(cfg: &TwinConfig, stepper: &Stepper, reference: &ModelState) -> Result<ModelState> {
    let d = cfg.domain;
    let forcing = &cfg.forcing;
    let scale = l2_norm(&reference.ttilde)?;
    let unit_sample = |seed: u64| -> Result<ScalarField3D> {
        let sampler = SmoothSampler::new(d, &cfg.params)?;
        let g = sampler.draw(&mut ChaCha8Rng::seed_from_u64(seed), None);
        let n = l2_norm(&g)?;
        Ok(if n > 0.0 { g.scaled(1.0 / n) } else { g })
    };
    let eta = match cfg.eta0 {
        Eta0Mode::Zero => ScalarField3D::zeros(d),
        Eta0Mode::Random { seed } => {
            let g = unit_sample(seed)?;
            if scale > 0.0 {
                g.scaled(scale)
            } else {
                g
            }
        }
        Eta0Mode::Perturbed { epsilon } if epsilon == 0.0 => return Ok(reference.clone()),
        Eta0Mode::Perturbed { epsilon } => {
            let g = unit_sample(cfg.seed)?;
            reference.ttilde.axpy(epsilon * scale, &g)
        }
    };
    stepper.initial_state(eta, reference.time, forcing)
}

fn record(
    series: &mut ErrorSeries,
    t: f64,
    reference: &ModelState,
    assimilated: &ModelState,
    p: &PhysParams,
) -> Result<()> {
    let chi = assimilated.ttilde.sub(&reference.ttilde);
    series.times.push(t);
    series.l2_chi.push(l2_norm(&chi)?);
    series.h1_u.push(h1_norm(&assimilated.diag.u.sub(&reference.diag.u))?);
    series.l2_ref.push(l2_norm(&reference.ttilde)?);
    series.energy_ref.push(energy_norm(&reference.ttilde, p)?);
    Ok(())
}
