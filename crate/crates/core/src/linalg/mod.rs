//! Linear-algebra building blocks used by the solvers.

mod band;
mod gmres;
pub mod modes;
mod tridiag;

pub use band::{BandLu, BandMatrix};
pub use gmres::{gmres, GmresOutcome, GmresSettings};
pub use tridiag::solve_tridiagonal;
