//! Implicit solves with the temperature operator `L₂`.
//!
//! Horizontally, the Neumann second difference is diagonalized by discrete
//! cosines; each horizontal wavenumber then leaves a tridiagonal system in
//! depth with the Neumann bottom and Robin top rows.

use ndarray::{Array2, Array3, Axis};

use crate::error::{Error, Result};
use crate::field::{DomainSpec, PhysParams, ScalarField3D};
use crate::linalg::modes::neumann_modes;
use crate::linalg::solve_tridiagonal;

/// Factorized `(I + θ L₂)` for one grid, parameter set and `θ`.
#[derive(Debug, Clone)]
pub struct Diffuser {
    domain: DomainSpec,
    theta: f64,
    /// Forward transforms `w_i φ_m(i)`, indexed `[m, i]`.
    fwd_x: Array2<f64>,
    fwd_y: Array2<f64>,
    /// Inverse transforms `φ_m(i)`, indexed `[i, m]`.
    inv_x: Array2<f64>,
    inv_y: Array2<f64>,
    mu_x: Vec<f64>,
    mu_y: Vec<f64>,
    sub: Vec<f64>,
    sup: Vec<f64>,
    diag_z: Vec<f64>,
    k_h: f64,
}

fn transforms(n: usize, d: f64) -> (Array2<f64>, Array2<f64>, Vec<f64>) {
    let m = neumann_modes(n, d);
    let fwd = Array2::from_shape_fn((n + 1, n + 1), |(k, i)| m.weights[i] * m.vectors[k][i]);
    let inv = Array2::from_shape_fn((n + 1, n + 1), |(i, k)| m.vectors[k][i]);
    (fwd, inv, m.eigenvalues)
}

impl Diffuser {
    pub fn new(domain: DomainSpec, p: &PhysParams, theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::InvalidField {
                name: "dt".into(),
                reason: format!("implicit weight must be positive, got {theta}"),
            });
        }
        let (fwd_x, inv_x, mu_x) = transforms(domain.nx, domain.dx());
        let (fwd_y, inv_y, mu_y) = transforms(domain.ny, domain.dy());
        let nz = domain.nz;
        let dz = domain.dz();
        let c = theta * p.k_v / (dz * dz);
        let mut sub = vec![-c; nz + 1];
        let mut sup = vec![-c; nz + 1];
        let mut diag_z = vec![2.0 * c; nz + 1];
        sup[0] = -2.0 * c;
        sub[nz] = -2.0 * c;
        diag_z[nz] += 2.0 * c * p.robin() * dz;
        Ok(Self {
            domain,
            theta,
            fwd_x,
            fwd_y,
            inv_x,
            inv_y,
            mu_x,
            mu_y,
            sub,
            sup,
            diag_z,
            k_h: p.k_h,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Solves `(I + θ L₂) x = rhs`.
    pub fn solve(&self, rhs: &ScalarField3D) -> Result<ScalarField3D> {
        let d = self.domain;
        rhs.check_finite("diffusion rhs")?;
        if rhs.domain != d {
            let (a, b, c) = d.shape3();
            return Err(Error::ShapeMismatch {
                expected: vec![a, b, c],
                found: rhs.values.shape().to_vec(),
            });
        }
        let mut coef = transform_xy(&rhs.values, &self.fwd_x, &self.fwd_y);
        let nz1 = d.nz + 1;
        let mut diag = vec![0.0; nz1];
        for kx in 0..=d.nx {
            for ky in 0..=d.ny {
                let shift = 1.0 + self.theta * self.k_h * (self.mu_x[kx] + self.mu_y[ky]);
                for (dg, dz) in diag.iter_mut().zip(&self.diag_z) {
                    *dg = shift + dz;
                }
                let mut lane = coef.index_axis_mut(Axis(0), kx);
                let mut col = lane.index_axis_mut(Axis(0), ky);
                let buf = col.as_slice_mut().expect("z lanes are contiguous");
                solve_tridiagonal(&self.sub, &diag, &self.sup, buf).ok_or_else(|| {
                    Error::SingularSystem(format!("vertical diffusion system ({kx}, {ky})"))
                })?;
            }
        }
        let values = transform_xy(&coef, &self.inv_x, &self.inv_y);
        let out = ScalarField3D { domain: d, values };
        out.check_finite("diffused temperature")?;
        Ok(out)
    }
}

/// `out[a, b, k] = Σ_{i,j} mx[a, i] my[b, j] f[i, j, k]`.
fn transform_xy(f: &Array3<f64>, mx: &Array2<f64>, my: &Array2<f64>) -> Array3<f64> {
    let (nx1, ny1, nz1) = f.dim();
    let mut tmp = Array3::<f64>::zeros((nx1, ny1, nz1));
    for a in 0..nx1 {
        for i in 0..nx1 {
            let c = mx[[a, i]];
            if c != 0.0 {
                let src = f.index_axis(Axis(0), i);
                let mut dst = tmp.index_axis_mut(Axis(0), a);
                dst.scaled_add(c, &src);
            }
        }
    }
    let mut out = Array3::<f64>::zeros((nx1, ny1, nz1));
    for b in 0..ny1 {
        for j in 0..ny1 {
            let c = my[[b, j]];
            if c != 0.0 {
                let src = tmp.index_axis(Axis(1), j);
                let mut dst = out.index_axis_mut(Axis(1), b);
                dst.scaled_add(c, &src);
            }
        }
    }
    out
}

/// One backward-Euler diffusion step, `(I + dt L₂) T' = T`.
pub fn diffusion_step(ttilde: &ScalarField3D, dt: f64, p: &PhysParams) -> Result<ScalarField3D> {
    Diffuser::new(ttilde.domain, p, dt)?.solve(ttilde)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::stencil::temperature_operator;
    use crate::linalg::modes::robin_modes;

    fn params() -> PhysParams {
        PhysParams {
            k_h: 0.2,
            k_v: 0.3,
            alpha: 0.7,
            ..PhysParams::default()
        }
    }

    #[test]
    fn zero_stays_zero() {
        let d = DomainSpec::unit(6, 5, 4);
        let out = diffusion_step(&ScalarField3D::zeros(d), 0.1, &params()).unwrap();
        assert_eq!(out.max_abs(), 0.0);
    }

    #[test]
    fn pure_neumann_limit_preserves_constants() {
        let d = DomainSpec::unit(6, 5, 4);
        let p = PhysParams {
            alpha: 1e-14,
            ..params()
        };
        let out = diffusion_step(&ScalarField3D::constant(d, 2.0), 0.5, &p).unwrap();
        assert!(out.sub(&ScalarField3D::constant(d, 2.0)).max_abs() < 1e-12);
    }

    #[test]
    fn inverts_identity_plus_operator() {
        let d = DomainSpec::new(1.2, 0.9, 0.8, 7, 6, 5);
        let p = params();
        let dt = 0.37;
        let x = ScalarField3D::from_fn(d, |x, y, z| (3.0 * x + y).sin() + z * x * y);
        let rhs = x.axpy(dt, &temperature_operator(&x, &p));
        let back = Diffuser::new(d, &p, dt).unwrap().solve(&rhs).unwrap();
        assert!(back.sub(&x).max_abs() < 1e-11);
    }

    #[test]
    fn vertical_eigenmode_decays_by_exact_factor() {
        let d = DomainSpec::unit(6, 6, 10);
        let p = params();
        let dt = 0.05;
        let modes = robin_modes(d.nz, d.dz(), p.robin()).unwrap();
        let lam = modes.eigenvalues[0];
        let z1 = modes.vectors[0].clone();
        let f = ScalarField3D {
            domain: d,
            values: Array3::from_shape_fn(d.shape3(), |(_, _, k)| z1[k]),
        };
        let out = diffusion_step(&f, dt, &p).unwrap();
        let factor = 1.0 / (1.0 + dt * p.k_v * lam);
        assert!(out.sub(&f.scaled(factor)).max_abs() < 1e-12);
    }
}
