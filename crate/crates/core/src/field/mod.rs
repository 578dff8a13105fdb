//! Discrete domain, node-collocated fields, stencils and norms.
//!
//! Fields live on the `(Nx+1) × (Ny+1) × (Nz+1)` node lattice of the box
//! `[0, Lx] × [0, Ly] × [-H, 0]`, stored z-fastest. Integrals use the
//! trapezoidal rule throughout; the per-axis trapezoid weights define the
//! discrete `L²(Ω)` inner product that all operators are adjoint in.

mod domain;
mod field;
mod norms;
mod params;
pub mod snapshot;
pub mod stencil;

pub use domain::DomainSpec;
pub use field::{ScalarField2D, ScalarField3D, VectorField2x3D};
pub use norms::{
    energy_norm, h1_norm, h1_norm_scalar, inner, l2_norm, l2_norm_2d, h1_norm_2d, h2_norm_2d,
};
pub use params::{poincare_constant, PhysParams};
pub use stencil::vertical_cumulative_divergence;
pub(crate) use domain::trapezoid_weights;

/// Shortest round-trip text for a float, with an exponent for very large or
/// small magnitudes; `nan`/`inf`/`-inf` for non-finite values.
pub fn fmt_f64(v: f64) -> String {
    match serde_json::Number::from_f64(v) {
        Some(n) => n.to_string(),
        None if v.is_nan() => "nan".into(),
        None if v > 0.0 => "inf".into(),
        None => "-inf".into(),
    }
}
