use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::diagnostic::{DiagnosticSolver, WindStress};
use crate::error::{Error, Result};
use crate::field::{h1_norm, inner, PhysParams, ScalarField2D, VectorField2x3D};
use crate::observe::SmoothSampler;

/// Empirical bound `ρ` on `‖U(χ)‖_{H¹} / |χ|`, the norm of the linear map
/// from a temperature difference to the velocity difference it drives.
///
/// Draws `n_samples` seeded smooth fields, solves the difference system for
/// each, and returns the largest ratio attained on their span (a
/// Rayleigh–Ritz estimate from below of the operator norm, never smaller
/// than the largest single-field ratio).
pub fn velocity_ratio_bound(
    solver: &DiagnosticSolver,
    p: &PhysParams,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    let d = solver.domain();
    let sampler = SmoothSampler::new(d, p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (zero, tau) = (ScalarField2D::zeros(d), WindStress::zeros(d));
    let mut chis = Vec::with_capacity(n_samples);
    let mut us = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let chi = sampler.draw(&mut rng, None);
        us.push(solver.solve(&chi, &zero, &tau, None)?.u);
        chis.push(chi);
    }
    let n = chis.len();
    if n == 0 {
        return Ok(0.0);
    }
    let mut gram = DMatrix::<f64>::zeros(n, n);
    let mut stiff = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let g = inner(&chis[i], &chis[j]);
            let s = h1_inner(&us[i], &us[j])?;
            gram[(i, j)] = g;
            gram[(j, i)] = g;
            stiff[(i, j)] = s;
            stiff[(j, i)] = s;
        }
    }
    let chol = gram.cholesky().ok_or_else(|| {
        Error::SingularSystem("sample fields are linearly dependent".into())
    })?;
    let l_inv = chol
        .l()
        .try_inverse()
        .ok_or_else(|| Error::SingularSystem("sample Gram factor".into()))?;
    let reduced = &l_inv * stiff * l_inv.transpose();
    let reduced = (&reduced + reduced.transpose()) * 0.5;
    let top = reduced
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(0.0f64, f64::max);
    Ok(top.sqrt())
}

/// H¹ inner product by polarization of [`h1_norm`].
fn h1_inner(a: &VectorField2x3D, b: &VectorField2x3D) -> Result<f64> {
    let plus = VectorField2x3D::new(a.u1.axpy(1.0, &b.u1), a.u2.axpy(1.0, &b.u2))?;
    let minus = a.sub(b);
    Ok(0.25 * (h1_norm(&plus)?.powi(2) - h1_norm(&minus)?.powi(2)))
}
