//! Transport by the diagnostic velocity in flux form on node-centered
//! control volumes.
//!
//! Control volume `(i, j, k)` has the trapezoid weights `wx_i wy_j wz_k` as
//! its volume. Horizontal face velocities are averages of the adjacent node
//! values, which makes the control-volume divergence of `(u₁, u₂)` equal to
//! the wall-flux divergence stencil. Vertical face velocities are then
//! accumulated from the bottom so that every control volume conserves mass
//! exactly; the lid flux is zero. With centered face values of `T`, the
//! discrete transport is skew-adjoint in the trapezoid inner product,
//! `⟨transport(T), T⟩ = 0` up to the constraint residual, and annihilates
//! constants.

use ndarray::Array3;

use crate::diagnostic::DiagnosticSolution;
use crate::error::{Error, Result};
use crate::field::stencil::{centered_2d, horizontal_divergence};
use crate::field::{DomainSpec, ScalarField2D, ScalarField3D, VectorField2x3D};

/// Vertical velocity on the faces between levels `k` and `k + 1`,
/// `W[.., k] = -Σ_{m ≤ k} wz_m (∇·u)_m`; shape `(nx+1, ny+1, nz)`.
pub fn face_vertical_velocity(u: &VectorField2x3D) -> Array3<f64> {
    let d = u.domain();
    let div = horizontal_divergence(u);
    let wz = d.weights_z();
    let mut w = Array3::zeros((d.nx + 1, d.ny + 1, d.nz));
    for i in 0..=d.nx {
        for j in 0..=d.ny {
            let mut acc = 0.0;
            for k in 0..d.nz {
                acc -= wz[k] * div[[i, j, k]];
                w[[i, j, k]] = acc;
            }
        }
    }
    w
}

/// `u·∇T + w ∂_z T` in flux form.
pub fn transport(t: &ScalarField3D, u: &VectorField2x3D) -> Result<ScalarField3D> {
    let d = t.domain;
    u.u1.check_same_grid(t)?;
    let (nx, ny, nz) = (d.nx, d.ny, d.nz);
    let (wx, wy, wz) = (d.weights_x(), d.weights_y(), d.weights_z());
    let (tv, u1, u2) = (&t.values, &u.u1.values, &u.u2.values);
    let w = face_vertical_velocity(u);
    let mut out = Array3::<f64>::zeros(d.shape3());
    for i in 0..nx {
        for j in 0..=ny {
            for k in 0..=nz {
                let f = 0.25 * (u1[[i, j, k]] + u1[[i + 1, j, k]]) * (tv[[i, j, k]] + tv[[i + 1, j, k]]);
                out[[i, j, k]] += f / wx[i];
                out[[i + 1, j, k]] -= f / wx[i + 1];
            }
        }
    }
    for i in 0..=nx {
        for j in 0..ny {
            for k in 0..=nz {
                let f = 0.25 * (u2[[i, j, k]] + u2[[i, j + 1, k]]) * (tv[[i, j, k]] + tv[[i, j + 1, k]]);
                out[[i, j, k]] += f / wy[j];
                out[[i, j + 1, k]] -= f / wy[j + 1];
            }
        }
    }
    for i in 0..=nx {
        for j in 0..=ny {
            for k in 0..nz {
                let f = 0.5 * w[[i, j, k]] * (tv[[i, j, k]] + tv[[i, j, k + 1]]);
                out[[i, j, k]] += f / wz[k];
                out[[i, j, k + 1]] -= f / wz[k + 1];
            }
        }
    }
    Ok(ScalarField3D {
        domain: d,
        values: out,
    })
}

/// `u·∇T*` with centered horizontal differences.
pub fn surface_advection(tstar: &ScalarField2D, u: &VectorField2x3D) -> ScalarField3D {
    let d = u.domain();
    let gx = centered_2d(&tstar.values, 0, d.dx());
    let gy = centered_2d(&tstar.values, 1, d.dy());
    let mut out = ScalarField3D::zeros(d);
    for ((i, j, k), v) in out.values.indexed_iter_mut() {
        *v = u.u1.values[[i, j, k]] * gx[[i, j]] + u.u2.values[[i, j, k]] * gy[[i, j]];
    }
    out
}

/// `-[u·∇T̃ + w ∂_z T̃ + u·∇T*]`.
pub fn advection_tendency(
    ttilde: &ScalarField3D,
    diag: &DiagnosticSolution,
    tstar: &ScalarField2D,
) -> Result<ScalarField3D> {
    if tstar.values.dim() != ttilde.domain.shape2() {
        let (a, b) = ttilde.domain.shape2();
        return Err(Error::ShapeMismatch {
            expected: vec![a, b],
            found: tstar.values.shape().to_vec(),
        });
    }
    let mut out = transport(ttilde, &diag.u)?;
    out.add_scaled(1.0, &surface_advection(tstar, &diag.u));
    out.values.mapv_inplace(|v| -v);
    Ok(out)
}

/// Advective Courant number `dt · max(|u₁|/Δx, |u₂|/Δy, |w|/Δz)`.
pub fn cfl_number(u: &VectorField2x3D, dt: f64) -> f64 {
    let d: DomainSpec = u.domain();
    let w = face_vertical_velocity(u);
    let m = |a: &Array3<f64>| a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rate = (m(&u.u1.values) / d.dx())
        .max(m(&u.u2.values) / d.dy())
        .max(m(&w) / d.dz());
    rate * dt
}
