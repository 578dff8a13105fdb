//! IMEX time stepping of the temperature equation.
//!
//! Transport, the source `Q*` and an optional nudging tendency are explicit;
//! the full temperature operator `L₂` is implicit (backward Euler, or
//! Crank–Nicolson for accuracy studies). After every step the diagnostic
//! velocity is re-solved, warm-started from the previous one.

mod advection;
mod diffusion;
mod forcing;

use serde::{Deserialize, Serialize};

use crate::diagnostic::{DiagnosticSolution, DiagnosticSolver, SolverSettings};
use crate::error::{Error, FieldIssue, Result};
use crate::field::stencil::temperature_operator;
use crate::field::{DomainSpec, PhysParams, ScalarField3D};

pub use advection::{
    advection_tendency, cfl_number, face_vertical_velocity, surface_advection, transport,
};
pub use diffusion::{diffusion_step, Diffuser};
pub use forcing::{compatibility_defect, compute_qstar, ForcingSpec};

/// Safety factor on the advective Courant number.
pub const CFL_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeScheme {
    ImexEuler,
    ImexCn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdvectionStencil {
    CenteredSkew,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepperSettings {
    pub dt: f64,
    pub scheme: TimeScheme,
    pub advection: AdvectionStencil,
}

impl Default for StepperSettings {
    fn default() -> Self {
        Self {
            dt: 0.005,
            scheme: TimeScheme::ImexEuler,
            advection: AdvectionStencil::CenteredSkew,
        }
    }
}

impl StepperSettings {
    pub fn validate(&self, prefix: &str, issues: &mut Vec<FieldIssue>) {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            issues.push(FieldIssue::new(format!("{prefix}dt"), "must be positive and finite"));
        }
    }
}

/// Temperature deviation at a time level with its diagnostic velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    pub ttilde: ScalarField3D,
    pub time: f64,
    pub diag: DiagnosticSolution,
    /// Courant number of the step that produced this state.
    pub cfl: f64,
}

/// Everything needed to advance one trajectory; immutable and shareable
/// between the reference and assimilated runs.
#[derive(Debug, Clone)]
pub struct Stepper {
    params: PhysParams,
    settings: StepperSettings,
    solver: DiagnosticSolver,
    implicit: Diffuser,
}

impl Stepper {
    pub fn new(
        domain: DomainSpec,
        params: &PhysParams,
        settings: StepperSettings,
        solver_settings: SolverSettings,
    ) -> Result<Self> {
        let mut issues = Vec::new();
        settings.validate("stepper.", &mut issues);
        if !issues.is_empty() {
            return Err(Error::Config(issues));
        }
        let theta = match settings.scheme {
            TimeScheme::ImexEuler => settings.dt,
            TimeScheme::ImexCn => 0.5 * settings.dt,
        };
        Ok(Self {
            params: *params,
            settings,
            solver: DiagnosticSolver::new(domain, params, solver_settings)?,
            implicit: Diffuser::new(domain, params, theta)?,
        })
    }

    pub fn solver(&self) -> &DiagnosticSolver {
        &self.solver
    }

    pub fn params(&self) -> &PhysParams {
        &self.params
    }

    pub fn settings(&self) -> StepperSettings {
        self.settings
    }

    /// Builds a state at `time`, solving for its diagnostic velocity.
    pub fn initial_state(
        &self,
        ttilde: ScalarField3D,
        time: f64,
        forcing: &ForcingSpec,
    ) -> Result<ModelState> {
        let diag = self.solver.solve(&ttilde, &forcing.tstar, &forcing.tau, None)?;
        Ok(ModelState {
            ttilde,
            time,
            diag,
            cfl: 0.0,
        })
    }

    /// One IMEX step. `nudge` is added to the explicit tendency.
    pub fn step(
        &self,
        state: &ModelState,
        forcing: &ForcingSpec,
        nudge: Option<&ScalarField3D>,
    ) -> Result<ModelState> {
        let dt = self.settings.dt;
        let cfl = cfl_number(&state.diag.u, dt);
        if cfl > CFL_LIMIT {
            return Err(Error::CflViolation {
                cfl,
                limit: CFL_LIMIT,
            });
        }
        let mut explicit = advection_tendency(&state.ttilde, &state.diag, &forcing.tstar)?;
        explicit.add_scaled(1.0, &forcing.qstar);
        if let Some(n) = nudge {
            n.check_same_grid(&state.ttilde)?;
            explicit.add_scaled(1.0, n);
        }
        let mut rhs = state.ttilde.axpy(dt, &explicit);
        if self.settings.scheme == TimeScheme::ImexCn {
            rhs.add_scaled(-0.5 * dt, &temperature_operator(&state.ttilde, &self.params));
        }
        let ttilde = self.implicit.solve(&rhs)?;
        let diag = self
            .solver
            .solve(&ttilde, &forcing.tstar, &forcing.tau, Some(&state.diag))?;
        Ok(ModelState {
            ttilde,
            time: state.time + dt,
            diag,
            cfl,
        })
    }
}

/// One-shot step that builds the solvers on every call; use [`Stepper`]
/// for trajectories.
pub fn step(
    state: &ModelState,
    forcing: &ForcingSpec,
    p: &PhysParams,
    s: StepperSettings,
    solver: SolverSettings,
    nudge: Option<&ScalarField3D>,
) -> Result<ModelState> {
    Stepper::new(state.ttilde.domain, p, s, solver)?.step(state, forcing, nudge)
}
