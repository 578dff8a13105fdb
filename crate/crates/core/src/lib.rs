//! Viscous planetary geostrophic (PG) ocean model with a temperature-only
//! nudging data-assimilation scheme.
//!
//! The model is solved in its reduced form: temperature deviation `T̃` from
//! the surface temperature `T*` is prognostic, while the horizontal velocity
//! and bottom pressure follow from a linear diagnostic balance at every
//! instant. The assimilated copy is driven toward the reference through
//! coarse observations of temperature alone.
//!
//! Layout:
//! - [`field`]: grid, node fields, stencils and norms
//! - [`linalg`]: band LU, GMRES, tridiagonal and small eigen solvers
//! - [`diagnostic`]: velocity / bottom-pressure solver and reconstructions
//! - [`stepper`]: IMEX temperature integrator
//! - [`observe`]: observation operators (modal projection, volume averages)
//! - [`assimilate`]: nudging, twin experiments, decay fits, bounds
//! - [`cli`]: configuration, reports and the command-line surface

pub mod assimilate;
pub mod cli;
pub mod diagnostic;
pub mod error;
pub mod field;
pub mod linalg;
pub mod observe;
pub mod stepper;

pub use error::{Error, FieldIssue, Result};
