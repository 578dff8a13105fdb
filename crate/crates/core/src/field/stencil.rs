//! Finite-difference stencils on the node lattice.
//!
//! Every operator eliminates boundary ghosts instead of storing them:
//!
//! - `centered`: `(f[i+1] - f[i-1]) / 2d` inside, zero on both end nodes
//!   (the normal derivative of a Neumann field).
//! - `adjoint_div`: minus the trapezoid-weighted adjoint of `centered`.
//!   Interior rows are centered but never read end values; the end rows
//!   reduce to `f[1]/d` and `-f[N-1]/d`. This is the divergence of a flux
//!   that vanishes on the walls.
//! - `neg_lap_neumann`: `-f''` with mirrored ghosts, `(2f[0] - 2f[1]) / d²`
//!   at the ends.
//! - `neg_lap_robin_top`: as above with Neumann at index 0 and
//!   `f' + a f = 0` at index N (ghost `f[N+1] = f[N-1] - 2 d a f[N]`).
//! - `neg_lap_dirichlet`: `-f''` on interior rows with zero end values.

use ndarray::{Array2, Array3, Axis, Zip};

use super::{ScalarField3D, VectorField2x3D};
use crate::field::PhysParams;

pub fn centered_1d(src: &[f64], dst: &mut [f64], d: f64) {
    let n = src.len() - 1;
    dst[0] = 0.0;
    dst[n] = 0.0;
    let inv = 0.5 / d;
    for i in 1..n {
        dst[i] = (src[i + 1] - src[i - 1]) * inv;
    }
}

pub fn adjoint_div_1d(src: &[f64], dst: &mut [f64], d: f64) {
    let n = src.len() - 1;
    let inner = |i: usize| if i == 0 || i == n { 0.0 } else { src[i] };
    dst[0] = src[1] / d;
    dst[n] = -src[n - 1] / d;
    let inv = 0.5 / d;
    for i in 1..n {
        dst[i] = (inner(i + 1) - inner(i - 1)) * inv;
    }
}

pub fn neg_lap_neumann_1d(src: &[f64], dst: &mut [f64], d: f64) {
    let n = src.len() - 1;
    let inv = 1.0 / (d * d);
    dst[0] = 2.0 * (src[0] - src[1]) * inv;
    dst[n] = 2.0 * (src[n] - src[n - 1]) * inv;
    for i in 1..n {
        dst[i] = (2.0 * src[i] - src[i - 1] - src[i + 1]) * inv;
    }
}

pub fn neg_lap_robin_top_1d(src: &[f64], dst: &mut [f64], d: f64, a: f64) {
    neg_lap_neumann_1d(src, dst, d);
    let n = src.len() - 1;
    dst[n] += 2.0 * a * src[n] / d;
}

pub fn neg_lap_dirichlet_1d(src: &[f64], dst: &mut [f64], d: f64) {
    let n = src.len() - 1;
    let inv = 1.0 / (d * d);
    let inner = |i: usize| if i == 0 || i == n { 0.0 } else { src[i] };
    dst[0] = 0.0;
    dst[n] = 0.0;
    for i in 1..n {
        dst[i] = (2.0 * src[i] - inner(i - 1) - inner(i + 1)) * inv;
    }
}

/// Cumulative trapezoid integral from index 0.
pub fn cumtrapz_1d(src: &[f64], dst: &mut [f64], d: f64) {
    dst[0] = 0.0;
    for i in 1..src.len() {
        dst[i] = dst[i - 1] + 0.5 * d * (src[i] + src[i - 1]);
    }
}

/// Applies a 1D kernel to every lane of `values` along `axis`.
pub fn map_lanes<F>(values: &Array3<f64>, axis: usize, mut kernel: F) -> Array3<f64>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let len = values.len_of(Axis(axis));
    let mut out = Array3::zeros(values.dim());
    let mut src = vec![0.0; len];
    let mut dst = vec![0.0; len];
    Zip::from(values.lanes(Axis(axis)))
        .and(out.lanes_mut(Axis(axis)))
        .for_each(|lane, mut target| {
            for (s, v) in src.iter_mut().zip(lane.iter()) {
                *s = *v;
            }
            kernel(&src, &mut dst);
            for (t, v) in target.iter_mut().zip(dst.iter()) {
                *t = *v;
            }
        });
    out
}

pub fn map_lanes_2d<F>(values: &Array2<f64>, axis: usize, mut kernel: F) -> Array2<f64>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let len = values.len_of(Axis(axis));
    let mut out = Array2::zeros(values.dim());
    let mut src = vec![0.0; len];
    let mut dst = vec![0.0; len];
    Zip::from(values.lanes(Axis(axis)))
        .and(out.lanes_mut(Axis(axis)))
        .for_each(|lane, mut target| {
            for (s, v) in src.iter_mut().zip(lane.iter()) {
                *s = *v;
            }
            kernel(&src, &mut dst);
            for (t, v) in target.iter_mut().zip(dst.iter()) {
                *t = *v;
            }
        });
    out
}

pub fn centered(values: &Array3<f64>, axis: usize, d: f64) -> Array3<f64> {
    map_lanes(values, axis, |s, t| centered_1d(s, t, d))
}

pub fn adjoint_div(values: &Array3<f64>, axis: usize, d: f64) -> Array3<f64> {
    map_lanes(values, axis, |s, t| adjoint_div_1d(s, t, d))
}

pub fn cumtrapz_z(values: &Array3<f64>, dz: f64) -> Array3<f64> {
    map_lanes(values, 2, |s, t| cumtrapz_1d(s, t, dz))
}

/// `∂ₓu₁ + ∂ᵧu₂` with the wall-flux divergence stencil.
pub fn horizontal_divergence(u: &VectorField2x3D) -> Array3<f64> {
    let d = u.domain();
    let mut div = adjoint_div(&u.u1.values, 0, d.dx());
    div += &adjoint_div(&u.u2.values, 1, d.dy());
    div
}

/// `w(z) = -∫_{-H}^{z} ∇·u dξ` by cumulative trapezoid; `w(-H) = 0` exactly.
pub fn vertical_cumulative_divergence(u: &VectorField2x3D) -> ScalarField3D {
    let d = u.domain();
    let div = horizontal_divergence(u);
    let mut w = cumtrapz_z(&div, d.dz());
    w.mapv_inplace(|v| -v);
    ScalarField3D {
        domain: d,
        values: w,
    }
}

/// `L₂ f = -K_h Δf - K_v ∂²_z f` under the homogeneous temperature
/// conditions (Neumann sides and bottom, Robin top).
pub fn temperature_operator(f: &ScalarField3D, p: &PhysParams) -> ScalarField3D {
    let d = f.domain;
    let (dx, dy, dz) = (d.dx(), d.dy(), d.dz());
    let a = p.robin();
    let lx = map_lanes(&f.values, 0, |s, t| neg_lap_neumann_1d(s, t, dx));
    let ly = map_lanes(&f.values, 1, |s, t| neg_lap_neumann_1d(s, t, dy));
    let lz = map_lanes(&f.values, 2, |s, t| neg_lap_robin_top_1d(s, t, dz, a));
    let values = (lx + ly) * p.k_h + lz * p.k_v;
    ScalarField3D { domain: d, values }
}

/// `-Δ` on a surface field with Neumann walls.
pub fn neg_laplacian_2d(values: &Array2<f64>, dx: f64, dy: f64) -> Array2<f64> {
    let lx = map_lanes_2d(values, 0, |s, t| neg_lap_neumann_1d(s, t, dx));
    let ly = map_lanes_2d(values, 1, |s, t| neg_lap_neumann_1d(s, t, dy));
    lx + ly
}

pub fn centered_2d(values: &Array2<f64>, axis: usize, d: f64) -> Array2<f64> {
    map_lanes_2d(values, axis, |s, t| centered_1d(s, t, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{inner, DomainSpec};
    use std::f64::consts::PI;

    fn weights(n: usize, d: f64) -> Vec<f64> {
        crate::field::domain::trapezoid_weights(n, d)
    }

    #[test]
    fn adjoint_div_is_minus_adjoint_of_centered() {
        let n = 9;
        let d = 0.3;
        let w = weights(n, d);
        let f: Vec<f64> = (0..=n).map(|i| ((i * 7 + 3) % 5) as f64 - 1.7).collect();
        let q: Vec<f64> = (0..=n).map(|i| ((i * 3 + 1) % 4) as f64 * 0.9 - 0.4).collect();
        let mut gf = vec![0.0; n + 1];
        let mut dq = vec![0.0; n + 1];
        centered_1d(&f, &mut gf, d);
        adjoint_div_1d(&q, &mut dq, d);
        let lhs: f64 = (0..=n).map(|i| w[i] * q[i] * gf[i]).sum();
        let rhs: f64 = (0..=n).map(|i| w[i] * dq[i] * f[i]).sum();
        assert!((lhs + rhs).abs() < 1e-12, "{lhs} vs {rhs}");
    }

    #[test]
    fn robin_operator_is_weighted_symmetric() {
        let n = 8;
        let d = 0.125;
        let a = 0.7;
        let w = weights(n, d);
        let f: Vec<f64> = (0..=n).map(|i| (i as f64 * 0.9).sin()).collect();
        let g: Vec<f64> = (0..=n).map(|i| (i as f64 * 0.4).cos() + 0.2).collect();
        let mut lf = vec![0.0; n + 1];
        let mut lg = vec![0.0; n + 1];
        neg_lap_robin_top_1d(&f, &mut lf, d, a);
        neg_lap_robin_top_1d(&g, &mut lg, d, a);
        let a1: f64 = (0..=n).map(|i| w[i] * g[i] * lf[i]).sum();
        let a2: f64 = (0..=n).map(|i| w[i] * f[i] * lg[i]).sum();
        assert!((a1 - a2).abs() < 1e-12);
    }

    #[test]
    fn cumulative_divergence_of_zero_is_zero() {
        let d = DomainSpec::unit(6, 6, 4);
        let w = vertical_cumulative_divergence(&VectorField2x3D::zeros(d));
        assert_eq!(w.max_abs(), 0.0);
    }

    #[test]
    fn depth_independent_solenoidal_flow_has_no_vertical_velocity() {
        let d = DomainSpec::unit(16, 16, 6);
        let u1 = ScalarField3D::from_fn(d, |x, y, _| PI * (PI * x).sin() * (PI * y).cos());
        let u2 = ScalarField3D::from_fn(d, |x, y, _| -PI * (PI * x).cos() * (PI * y).sin());
        let w = vertical_cumulative_divergence(&VectorField2x3D::new(u1, u2).unwrap());
        assert!(w.max_abs() < 1e-12, "{}", w.max_abs());
    }

    #[test]
    fn cumulative_divergence_matches_closed_form() {
        // u1 = sin(2πx) g(z), g = cos(πz); w = -2π cos(2πx) ∫_{-1}^{z} g.
        let errs: Vec<f64> = [8usize, 16, 32]
            .iter()
            .map(|&n| {
                let d = DomainSpec::unit(n, n, n);
                let u1 = ScalarField3D::from_fn(d, |x, _, z| (2.0 * PI * x).sin() * (PI * z).cos());
                let u = VectorField2x3D::new(u1, ScalarField3D::zeros(d)).unwrap();
                let w = vertical_cumulative_divergence(&u);
                let exact = ScalarField3D::from_fn(d, |x, _, z| {
                    -2.0 * PI * (2.0 * PI * x).cos() * ((PI * z).sin() + (PI).sin()) / PI
                });
                assert_eq!(w.values.index_axis(Axis(2), 0).iter().fold(0.0_f64, |m, v| m.max(v.abs())), 0.0);
                w.sub(&exact).max_abs()
            })
            .collect();
        assert!(errs[0] / errs[1] > 3.5 && errs[1] / errs[2] > 3.5, "{errs:?}");
    }

    #[test]
    fn temperature_operator_quadratic_form_matches_energy_norm() {
        let d = DomainSpec::new(1.0, 0.8, 1.5, 7, 6, 5);
        let p = PhysParams {
            k_h: 0.3,
            k_v: 0.7,
            alpha: 0.4,
            depth: 1.5,
            ..PhysParams::default()
        };
        let f = ScalarField3D::from_fn(d, |x, y, z| (3.0 * x).sin() + y * z + 0.3 * (z * 2.0).cos());
        let lf = temperature_operator(&f, &p);
        let e = crate::field::energy_norm(&f, &p).unwrap();
        assert!((inner(&f, &lf) - e * e).abs() < 1e-11 * e * e);
    }
}
