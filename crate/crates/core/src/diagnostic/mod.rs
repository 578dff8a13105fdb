//! Diagnostic momentum balance: horizontal velocity and surface pressure
//! from the temperature field, plus reconstruction of `w` and `p`.
//!
//! The discrete system is the monolithic saddle-point problem described in
//! [`operator`]. The `iterative-krylov` method runs flexible GMRES on the
//! matrix-free operator, preconditioned by the vertical-mode block inverse;
//! `dense-direct` factorizes the explicitly assembled matrix.
//!
//! The centered gradient has a four-dimensional kernel on the node lattice
//! (one constant per checkerboard class). One value per class is pinned
//! during the solve and each class is then shifted to zero weighted mean,
//! which leaves `p_s` with zero mean over the surface.

mod dense;
mod operator;
mod precond;

use nalgebra::{DMatrix, Dyn, LU};
use serde::{Deserialize, Serialize};

use crate::error::{Error, FieldIssue, Result};
use crate::field::stencil::cumtrapz_z;
use crate::field::{
    h1_norm, l2_norm, vertical_cumulative_divergence, DomainSpec, PhysParams, ScalarField2D,
    ScalarField3D, VectorField2x3D,
};
use crate::linalg::{gmres, GmresSettings};
use operator::SaddleOperator;
use precond::ModalPreconditioner;

/// Largest system the dense path will factorize.
pub const DENSE_LIMIT: usize = 4000;

const RESTART: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMethod {
    IterativeKrylov,
    DenseDirect,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub method: SolverMethod,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
            method: SolverMethod::IterativeKrylov,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self, prefix: &str, issues: &mut Vec<FieldIssue>) {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            issues.push(FieldIssue::new(format!("{prefix}tol"), "must lie in (0, 1)"));
        }
        if self.max_iter < 1 {
            issues.push(FieldIssue::new(format!("{prefix}max_iter"), "must be at least 1"));
        }
    }
}

/// Surface wind stress `τ = (τ₁, τ₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindStress {
    pub tau1: ScalarField2D,
    pub tau2: ScalarField2D,
}

impl WindStress {
    pub fn zeros(domain: DomainSpec) -> Self {
        Self {
            tau1: ScalarField2D::zeros(domain),
            tau2: ScalarField2D::zeros(domain),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticSolution {
    pub u: VectorField2x3D,
    /// Surface pressure with zero weighted mean.
    pub p_s: ScalarField2D,
    /// `‖r_momentum‖₂ / ‖b‖₂`.
    pub momentum_residual: f64,
    /// `max |∇·Σ_k w_k u_k| / max |u|` over all surface nodes.
    pub constraint_residual: f64,
    pub iterations: usize,
}

impl DiagnosticSolution {
    pub fn zeros(domain: DomainSpec) -> Self {
        Self {
            u: VectorField2x3D::zeros(domain),
            p_s: ScalarField2D::zeros(domain),
            momentum_residual: 0.0,
            constraint_residual: 0.0,
            iterations: 0,
        }
    }
}

#[derive(Debug, Clone)]
enum Backend {
    Krylov(ModalPreconditioner),
    Dense(LU<f64, Dyn, Dyn>),
}

/// Factorized solver for one grid and parameter set. Immutable after
/// construction, so one instance can serve several trajectories.
#[derive(Debug, Clone)]
pub struct DiagnosticSolver {
    domain: DomainSpec,
    params: PhysParams,
    settings: SolverSettings,
    op: SaddleOperator,
    backend: Backend,
}

impl DiagnosticSolver {
    pub fn new(domain: DomainSpec, params: &PhysParams, settings: SolverSettings) -> Result<Self> {
        if domain.nz < 3 {
            return Err(Error::SingularSystem(format!(
                "need at least 3 vertical cells, got {}",
                domain.nz
            )));
        }
        let mut issues = Vec::new();
        domain.validate("domain.", &mut issues);
        params.validate("params.", &mut issues);
        settings.validate("solver.", &mut issues);
        if !issues.is_empty() {
            return Err(Error::Config(issues));
        }
        let coriolis = (0..=domain.ny).map(|j| params.coriolis(domain.y(j))).collect();
        let op = SaddleOperator::new(&domain, params.a_h, params.a_v, coriolis);
        let backend = match settings.method {
            SolverMethod::IterativeKrylov => Backend::Krylov(ModalPreconditioner::new(&op)?),
            SolverMethod::DenseDirect => {
                let n = op.len();
                if n > DENSE_LIMIT {
                    return Err(Error::Config(vec![FieldIssue::new(
                        "solver.method",
                        format!("dense-direct supports at most {DENSE_LIMIT} unknowns, grid has {n}"),
                    )]));
                }
                Backend::Dense(dense::assemble(&domain, params).lu())
            }
        };
        Ok(Self {
            domain,
            params: *params,
            settings,
            op,
            backend,
        })
    }

    pub fn domain(&self) -> DomainSpec {
        self.domain
    }

    pub fn settings(&self) -> SolverSettings {
        self.settings
    }

    /// Right-hand side: known part of `-∇Φ` plus the wind-stress ghost term.
    fn rhs(&self, ttilde: &ScalarField3D, tstar: &ScalarField2D, tau: &WindStress) -> Vec<f64> {
        let d = self.domain;
        let op = &self.op;
        let (nx, ny, nz) = (d.nx, d.ny, d.nz);
        let (dx, dy, dz) = (d.dx(), d.dy(), d.dz());
        let c = cumtrapz_z(&ttilde.values, dz);
        let ts = &tstar.values;
        let top = 2.0 * self.params.a_v / dz;
        let n3 = op.n3();
        let mut b = vec![0.0; op.len()];
        for i in 0..=nx {
            for j in 0..=ny {
                for k in 0..=nz {
                    let zh = d.z(k) + d.h;
                    let row = op.at3(i, j, k);
                    if i != 0 && i != nx {
                        let g = (c[[i + 1, j, k]] - c[[i - 1, j, k]]) / (2.0 * dx)
                            + zh * (ts[[i + 1, j]] - ts[[i - 1, j]]) / (2.0 * dx);
                        let stress = if k == nz { top * tau.tau1.values[[i, j]] } else { 0.0 };
                        b[row] = g + stress;
                    }
                    if j != 0 && j != ny {
                        let g = (c[[i, j + 1, k]] - c[[i, j - 1, k]]) / (2.0 * dy)
                            + zh * (ts[[i, j + 1]] - ts[[i, j - 1]]) / (2.0 * dy);
                        let stress = if k == nz { top * tau.tau2.values[[i, j]] } else { 0.0 };
                        b[n3 + row] = g + stress;
                    }
                }
            }
        }
        b
    }

    fn check_inputs(
        &self,
        ttilde: &ScalarField3D,
        tstar: &ScalarField2D,
        tau: &WindStress,
    ) -> Result<()> {
        let (a, b, c) = self.domain.shape3();
        if ttilde.values.dim() != (a, b, c) {
            return Err(Error::ShapeMismatch {
                expected: vec![a, b, c],
                found: ttilde.values.shape().to_vec(),
            });
        }
        for f in [tstar, &tau.tau1, &tau.tau2] {
            if f.values.dim() != (a, b) {
                return Err(Error::ShapeMismatch {
                    expected: vec![a, b],
                    found: f.values.shape().to_vec(),
                });
            }
        }
        ttilde.check_finite("Ttilde")?;
        tstar.check_finite("Tstar")?;
        tau.tau1.check_finite("tau1")?;
        tau.tau2.check_finite("tau2")
    }

    /// Solves the momentum balance, starting from `warm` when given.
    pub fn solve(
        &self,
        ttilde: &ScalarField3D,
        tstar: &ScalarField2D,
        tau: &WindStress,
        warm: Option<&DiagnosticSolution>,
    ) -> Result<DiagnosticSolution> {
        self.check_inputs(ttilde, tstar, tau)?;
        let op = &self.op;
        let (n3, n2) = (op.n3(), op.n2());
        let b = self.rhs(ttilde, tstar, tau);
        let mut x = vec![0.0; op.len()];
        let iterations = match &self.backend {
            Backend::Krylov(pc) => {
                if let Some(w) = warm {
                    w.u.u1.check_same_grid(ttilde)?;
                    x[..n3].copy_from_slice(as_slice3(&w.u.u1));
                    x[n3..2 * n3].copy_from_slice(as_slice3(&w.u.u2));
                    x[2 * n3..].copy_from_slice(w.p_s.values.as_slice().expect("standard layout"));
                }
                let settings = GmresSettings {
                    tol: self.settings.tol,
                    restart: RESTART,
                    max_iter: self.settings.max_iter,
                };
                gmres(|v, y| op.apply(v, y), |r, z| pc.apply(r, z), &b, &mut x, settings)?
                    .iterations
            }
            Backend::Dense(lu) => {
                let rhs = DMatrix::from_column_slice(b.len(), 1, &b);
                let sol = lu
                    .solve(&rhs)
                    .ok_or_else(|| Error::SingularSystem("dense LU is singular".into()))?;
                x.copy_from_slice(sol.as_slice());
                1
            }
        };
        let mut ax = vec![0.0; x.len()];
        op.apply(&x, &mut ax);
        let bnorm = norm(&b);
        let rmom: f64 = ax[..2 * n3]
            .iter()
            .zip(&b[..2 * n3])
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let momentum_residual = if bnorm > 0.0 { rmom / bnorm } else { rmom };
        if !momentum_residual.is_finite() {
            return Err(Error::NoConvergence {
                residual: momentum_residual,
                iterations,
            });
        }

        let d = self.domain;
        let u1 = field3(d, &x[..n3]);
        let u2 = field3(d, &x[n3..2 * n3]);
        let mut p_s = ScalarField2D::zeros(d);
        p_s.values
            .as_slice_mut()
            .expect("standard layout")
            .copy_from_slice(&x[2 * n3..2 * n3 + n2]);
        remove_class_means(&mut p_s);
        let u = VectorField2x3D { u1, u2 };
        let constraint_residual = self.constraint_residual(&u);
        Ok(DiagnosticSolution {
            u,
            p_s,
            momentum_residual,
            constraint_residual,
            iterations,
        })
    }

    /// `max |∇·Σ_k w_k u_k| / max |u|`, zero for `u ≡ 0`.
    pub fn constraint_residual(&self, u: &VectorField2x3D) -> f64 {
        let op = &self.op;
        let s1 = op.depth_sum(as_slice3(&u.u1));
        let s2 = op.depth_sum(as_slice3(&u.u2));
        let mut worst: f64 = 0.0;
        for i in 0..=op.nx {
            for j in 0..=op.ny {
                worst = worst.max(op.constraint_at(&s1, &s2, i, j).abs());
            }
        }
        let scale = u.max_abs();
        if scale > 0.0 {
            worst / scale
        } else {
            worst
        }
    }

    /// `‖U‖_{H¹} / |χ|` for the difference system driven by `chi` alone.
    pub fn velocity_error_ratio(&self, chi: &ScalarField3D) -> Result<f64> {
        let l2 = l2_norm(chi)?;
        if l2 == 0.0 {
            return Ok(0.0);
        }
        let zero = ScalarField2D::zeros(self.domain);
        let sol = self.solve(chi, &zero, &WindStress::zeros(self.domain), None)?;
        Ok(h1_norm(&sol.u)? / l2)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn as_slice3(f: &ScalarField3D) -> &[f64] {
    f.values.as_slice().expect("fields use standard layout")
}

fn field3(d: DomainSpec, data: &[f64]) -> ScalarField3D {
    let mut f = ScalarField3D::zeros(d);
    f.values
        .as_slice_mut()
        .expect("standard layout")
        .copy_from_slice(data);
    f
}

/// Shifts each checkerboard class `(i mod 2, j mod 2)` to zero weighted mean.
fn remove_class_means(p: &mut ScalarField2D) {
    let d = p.domain;
    let (wx, wy) = (d.weights_x(), d.weights_y());
    let mut sums = [[0.0f64; 2]; 2];
    let mut weights = [[0.0f64; 2]; 2];
    for ((i, j), v) in p.values.indexed_iter() {
        let w = wx[i] * wy[j];
        sums[i % 2][j % 2] += w * v;
        weights[i % 2][j % 2] += w;
    }
    for ((i, j), v) in p.values.indexed_iter_mut() {
        *v -= sums[i % 2][j % 2] / weights[i % 2][j % 2];
    }
}

/// One-shot solve; builds and factorizes a [`DiagnosticSolver`].
pub fn solve_velocity(
    ttilde: &ScalarField3D,
    tstar: &ScalarField2D,
    tau: &WindStress,
    p: &PhysParams,
    s: SolverSettings,
) -> Result<DiagnosticSolution> {
    DiagnosticSolver::new(ttilde.domain, p, s)?.solve(ttilde, tstar, tau, None)
}

/// `w = -∫_{-H}^z ∇·u`.
pub fn reconstruct_w(u: &VectorField2x3D) -> ScalarField3D {
    vertical_cumulative_divergence(u)
}

/// `p = p_s - ∫_{-H}^z T`.
pub fn reconstruct_pressure(p_s: &ScalarField2D, t: &ScalarField3D) -> Result<ScalarField3D> {
    let d = t.domain;
    if p_s.values.dim() != d.shape2() {
        let (a, b) = d.shape2();
        return Err(Error::ShapeMismatch {
            expected: vec![a, b],
            found: p_s.values.shape().to_vec(),
        });
    }
    let c = cumtrapz_z(&t.values, d.dz());
    let mut out = ScalarField3D::from_surface(p_s);
    out.values -= &c;
    Ok(out)
}

/// One-shot version of [`DiagnosticSolver::velocity_error_ratio`].
pub fn velocity_error_ratio(chi: &ScalarField3D, p: &PhysParams, s: SolverSettings) -> Result<f64> {
    if l2_norm(chi)? == 0.0 {
        return Ok(0.0);
    }
    DiagnosticSolver::new(chi.domain, p, s)?.velocity_error_ratio(chi)
}
