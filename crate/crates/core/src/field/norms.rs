//! Discrete norms.
//!
//! Volume integrals use the trapezoid product rule. Gradient integrals are
//! edge sums `Σ (f[i+1] - f[i])² / d` weighted by the trapezoid rule in the
//! transverse directions; with this choice `⟨L₂ f, f⟩ = ‖f‖²` holds exactly
//! for the discrete temperature operator.

use ndarray::{Array2, Array3};

use super::{DomainSpec, PhysParams, ScalarField2D, ScalarField3D, VectorField2x3D};
use crate::error::Result;

/// Trapezoid `L²(Ω)` inner product.
pub fn inner(f: &ScalarField3D, g: &ScalarField3D) -> f64 {
    weighted_sum(&f.domain, |i, j, k| f.values[[i, j, k]] * g.values[[i, j, k]])
}

fn weighted_sum(d: &DomainSpec, term: impl Fn(usize, usize, usize) -> f64) -> f64 {
    let (wx, wy, wz) = (d.weights_x(), d.weights_y(), d.weights_z());
    let mut total = 0.0;
    for (i, &ax) in wx.iter().enumerate() {
        for (j, &ay) in wy.iter().enumerate() {
            let mut col = 0.0;
            for (k, &az) in wz.iter().enumerate() {
                col += az * term(i, j, k);
            }
            total += ax * ay * col;
        }
    }
    total
}

/// `|f| = (∫_Ω f²)^{1/2}`.
pub fn l2_norm(f: &ScalarField3D) -> Result<f64> {
    f.check_finite("f")?;
    Ok(inner(f, f).sqrt())
}

/// `Σ_edges (Δf)²/d` along `axis`, trapezoid-weighted across the others.
fn edge_energy(d: &DomainSpec, v: &Array3<f64>, axis: usize) -> f64 {
    let (wx, wy, wz) = (d.weights_x(), d.weights_y(), d.weights_z());
    let (nx, ny, nz) = d.shape3();
    let mut total = 0.0;
    match axis {
        0 => {
            let inv = 1.0 / d.dx();
            for i in 0..nx - 1 {
                for j in 0..ny {
                    for k in 0..nz {
                        let df = v[[i + 1, j, k]] - v[[i, j, k]];
                        total += wy[j] * wz[k] * df * df * inv;
                    }
                }
            }
        }
        1 => {
            let inv = 1.0 / d.dy();
            for i in 0..nx {
                for j in 0..ny - 1 {
                    for k in 0..nz {
                        let df = v[[i, j + 1, k]] - v[[i, j, k]];
                        total += wx[i] * wz[k] * df * df * inv;
                    }
                }
            }
        }
        _ => {
            let inv = 1.0 / d.dz();
            for i in 0..nx {
                for j in 0..ny {
                    for k in 0..nz - 1 {
                        let df = v[[i, j, k + 1]] - v[[i, j, k]];
                        total += wx[i] * wy[j] * df * df * inv;
                    }
                }
            }
        }
    }
    total
}

/// `‖f‖ = (α ∫_{Γ_u} f² + ∫_Ω K_h |∇f|² + K_v |∂_z f|²)^{1/2}`.
pub fn energy_norm(f: &ScalarField3D, p: &PhysParams) -> Result<f64> {
    f.check_finite("f")?;
    let d = &f.domain;
    let (wx, wy) = (d.weights_x(), d.weights_y());
    let top = d.nz;
    let mut surface = 0.0;
    for (i, &ax) in wx.iter().enumerate() {
        for (j, &ay) in wy.iter().enumerate() {
            let v = f.values[[i, j, top]];
            surface += ax * ay * v * v;
        }
    }
    let horizontal = edge_energy(d, &f.values, 0) + edge_energy(d, &f.values, 1);
    let vertical = edge_energy(d, &f.values, 2);
    Ok((p.alpha * surface + p.k_h * horizontal + p.k_v * vertical).sqrt())
}

/// Scalar `H¹(Ω)` norm: `|f|² + Σ_axes ∫ |∂f|²`.
pub fn h1_norm_scalar(f: &ScalarField3D) -> Result<f64> {
    f.check_finite("f")?;
    let d = &f.domain;
    let grad = (0..3).map(|a| edge_energy(d, &f.values, a)).sum::<f64>();
    Ok((inner(f, f) + grad).sqrt())
}

/// Vector `H¹(Ω)` norm over both horizontal components.
pub fn h1_norm(u: &VectorField2x3D) -> Result<f64> {
    let a = h1_norm_scalar(&u.u1)?;
    let b = h1_norm_scalar(&u.u2)?;
    Ok((a * a + b * b).sqrt())
}

fn surface_sums(d: &DomainSpec, v: &Array2<f64>) -> (f64, f64, f64) {
    let (wx, wy) = (d.weights_x(), d.weights_y());
    let (nx, ny) = d.shape2();
    let mut l2 = 0.0;
    for i in 0..nx {
        for j in 0..ny {
            l2 += wx[i] * wy[j] * v[[i, j]] * v[[i, j]];
        }
    }
    let mut gx = 0.0;
    for i in 0..nx - 1 {
        for j in 0..ny {
            let df = v[[i + 1, j]] - v[[i, j]];
            gx += wy[j] * df * df / d.dx();
        }
    }
    let mut gy = 0.0;
    for i in 0..nx {
        for j in 0..ny - 1 {
            let df = v[[i, j + 1]] - v[[i, j]];
            gy += wx[i] * df * df / d.dy();
        }
    }
    (l2, gx, gy)
}

/// `‖f‖_{L²(M)}`.
pub fn l2_norm_2d(f: &ScalarField2D) -> Result<f64> {
    f.check_finite("f")?;
    Ok(surface_sums(&f.domain, &f.values).0.sqrt())
}

/// `‖f‖_{H¹(M)}`.
pub fn h1_norm_2d(f: &ScalarField2D) -> Result<f64> {
    f.check_finite("f")?;
    let (l2, gx, gy) = surface_sums(&f.domain, &f.values);
    Ok((l2 + gx + gy).sqrt())
}

/// `‖f‖_{H²(M)}`: `H¹` part plus `∂ₓₓ`, `∂ᵧᵧ` (Neumann second differences)
/// and twice the cell-centred mixed derivative.
pub fn h2_norm_2d(f: &ScalarField2D) -> Result<f64> {
    f.check_finite("f")?;
    let d = &f.domain;
    let v = &f.values;
    let (l2, gx, gy) = surface_sums(d, v);
    let (dx, dy) = (d.dx(), d.dy());
    let fxx = super::stencil::map_lanes_2d(v, 0, |s, t| super::stencil::neg_lap_neumann_1d(s, t, dx));
    let fyy = super::stencil::map_lanes_2d(v, 1, |s, t| super::stencil::neg_lap_neumann_1d(s, t, dy));
    let (wx, wy) = (d.weights_x(), d.weights_y());
    let (nx, ny) = d.shape2();
    let mut second = 0.0;
    for i in 0..nx {
        for j in 0..ny {
            second += wx[i] * wy[j] * (fxx[[i, j]].powi(2) + fyy[[i, j]].powi(2));
        }
    }
    let mut mixed = 0.0;
    for i in 0..nx - 1 {
        for j in 0..ny - 1 {
            let c = (v[[i + 1, j + 1]] - v[[i + 1, j]] - v[[i, j + 1]] + v[[i, j]]) / (dx * dy);
            mixed += c * c * dx * dy;
        }
    }
    Ok((l2 + gx + gy + second + 2.0 * mixed).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_and_constant_fields() {
        let d = DomainSpec::unit(6, 6, 4);
        assert_eq!(l2_norm(&ScalarField3D::zeros(d)).unwrap(), 0.0);
        let c = ScalarField3D::constant(d, -3.0);
        assert!((l2_norm(&c).unwrap() - 3.0).abs() < 1e-14);
        let p = PhysParams {
            alpha: 1.0,
            ..PhysParams::default()
        };
        assert_eq!(energy_norm(&ScalarField3D::zeros(d), &p).unwrap(), 0.0);
        assert!((energy_norm(&c, &p).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn non_finite_values_are_rejected() {
        let d = DomainSpec::unit(4, 4, 4);
        let mut f = ScalarField3D::zeros(d);
        f.values[[1, 2, 3]] = f64::NAN;
        assert!(l2_norm(&f).is_err());
        assert!(h1_norm_scalar(&f).is_err());
    }

    #[test]
    fn l2_norm_converges_second_order() {
        // cos(2πx) on the unit box: |f| = 1/√2.
        let errs: Vec<f64> = [8usize, 16, 32]
            .iter()
            .map(|&n| {
                let d = DomainSpec::unit(n, n, 4);
                // Nodes sample whole periods, so offset the phase to avoid
                // trapezoid superconvergence.
                let f = ScalarField3D::from_fn(d, |x, _, _| (2.0 * PI * x * 0.9).cos());
                let exact = {
                    let k = 2.0 * PI * 0.9;
                    (0.5 + (2.0 * k).sin() / (4.0 * k)).sqrt()
                };
                (l2_norm(&f).unwrap() - exact).abs()
            })
            .collect();
        assert!(errs[0] / errs[1] > 3.5 && errs[1] / errs[2] > 3.5, "{errs:?}");
        let d = DomainSpec::unit(16, 16, 4);
        let f = ScalarField3D::from_fn(d, |x, _, _| (2.0 * PI * x).cos());
        assert!((l2_norm(&f).unwrap() - 0.5_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn energy_norm_of_vertical_mode_matches_closed_form() {
        // f = cos(π z / H): surface value cos 0 = 1, ∫(∂_z f)² = π²/(2H) * area.
        let p = PhysParams {
            alpha: 0.5,
            k_v: 0.3,
            k_h: 2.0,
            depth: 1.0,
            ..PhysParams::default()
        };
        let exact = (p.alpha + p.k_v * PI * PI / 2.0).sqrt();
        let errs: Vec<f64> = [8usize, 16, 32]
            .iter()
            .map(|&n| {
                let d = DomainSpec::unit(4, 4, n);
                let f = ScalarField3D::from_fn(d, |_, _, z| (PI * z).cos());
                (energy_norm(&f, &p).unwrap() - exact).abs()
            })
            .collect();
        assert!(errs[0] / errs[1] > 3.5 && errs[1] / errs[2] > 3.5, "{errs:?}");
    }

    #[test]
    fn h1_norm_of_constant_vector() {
        let d = DomainSpec::new(2.0, 1.0, 0.5, 6, 6, 4);
        let u = VectorField2x3D::new(ScalarField3D::constant(d, 1.5), ScalarField3D::zeros(d)).unwrap();
        assert!((h1_norm(&u).unwrap() - 1.5 * d.volume().sqrt()).abs() < 1e-13);
        assert_eq!(h1_norm(&VectorField2x3D::zeros(d)).unwrap(), 0.0);
    }

    #[test]
    fn h1_norm_converges_under_refinement() {
        // u1 = sin(πx)cos(πy)z, u2 = 0 on the unit box.
        // |u1|² = 1/4 * 1/3; gradient adds π²/4*1/3 twice; ∂z adds 1/4.
        let exact = (1.0 / 12.0 + 2.0 * PI * PI / 12.0 + 0.25_f64).sqrt();
        let errs: Vec<f64> = [8usize, 16, 32]
            .iter()
            .map(|&n| {
                let d = DomainSpec::unit(n, n, n);
                let u1 = ScalarField3D::from_fn(d, |x, y, z| (PI * x).sin() * (PI * y).cos() * z);
                let u = VectorField2x3D::new(u1, ScalarField3D::zeros(d)).unwrap();
                (h1_norm(&u).unwrap() - exact).abs()
            })
            .collect();
        assert!(errs[0] / errs[1] > 3.0 && errs[1] / errs[2] > 3.0, "{errs:?}");
    }

    #[test]
    fn surface_norms_of_cosine() {
        let d = DomainSpec::unit(64, 64, 4);
        let f = ScalarField2D::from_fn(d, |x, y| (PI * x).cos() * (PI * y).cos());
        assert!((l2_norm_2d(&f).unwrap() - 0.5).abs() < 1e-12);
        let h1 = (0.25 * (1.0 + 2.0 * PI * PI)).sqrt();
        assert!((h1_norm_2d(&f).unwrap() - h1).abs() < 1e-3);
        let h2 = (0.25 * (1.0 + 2.0 * PI * PI + 4.0 * PI.powi(4))).sqrt();
        assert!((h2_norm_2d(&f).unwrap() - h2).abs() / h2 < 1e-2);
    }

    #[test]
    fn norms_are_bitwise_repeatable() {
        let d = DomainSpec::unit(9, 7, 5);
        let f = ScalarField3D::from_fn(d, |x, y, z| (x * 3.1).sin() * (y + z).exp());
        let p = PhysParams::default();
        assert_eq!(l2_norm(&f).unwrap().to_bits(), l2_norm(&f).unwrap().to_bits());
        assert_eq!(
            energy_norm(&f, &p).unwrap().to_bits(),
            energy_norm(&f, &p).unwrap().to_bits()
        );
    }
}
