use std::io::Write;
use std::path::Path;

use ndarray::Array3;

use crate::error::{Error, Result};
use crate::field::{DomainSpec, PhysParams, ScalarField3D};
use crate::linalg::modes::{neumann_modes, robin_modes, transform_axis, Modes1D};

/// One tensor-product eigenfunction `X_kx(x) Y_ky(y) Z_mz(z)` of `-Δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeIndex {
    pub kx: usize,
    pub ky: usize,
    pub mz: usize,
    pub lambda: f64,
}

/// Eigenbasis of the discrete Laplacian with Neumann sides and bottom and
/// the Robin top, restricted to `λ ≤ h⁻²`.
#[derive(Debug, Clone)]
pub struct ModalBasis {
    pub domain: DomainSpec,
    pub h: f64,
    pub x: Modes1D,
    pub y: Modes1D,
    pub z: Modes1D,
    /// Retained modes in nondecreasing `λ`, ties broken by `(kx, ky, mz)`.
    pub retained: Vec<ModeIndex>,
    /// Smallest eigenvalue of the full basis.
    pub lambda1: f64,
    mask: Array3<bool>,
}

pub fn build_modal_basis(d: DomainSpec, p: &PhysParams, h: f64) -> Result<ModalBasis> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidField {
            name: "h".into(),
            reason: format!("must be positive, got {h}"),
        });
    }
    let x = neumann_modes(d.nx, d.dx());
    let y = neumann_modes(d.ny, d.dy());
    let z = robin_modes(d.nz, d.dz(), p.robin())?;
    let cutoff = h.powi(-2);
    let mut all = Vec::with_capacity(x.len() * y.len() * z.len());
    for (kx, lx) in x.eigenvalues.iter().enumerate() {
        for (ky, ly) in y.eigenvalues.iter().enumerate() {
            for (mz, lz) in z.eigenvalues.iter().enumerate() {
                all.push(ModeIndex {
                    kx,
                    ky,
                    mz,
                    lambda: lx + ly + lz,
                });
            }
        }
    }
    all.sort_by(|a, b| {
        a.lambda
            .total_cmp(&b.lambda)
            .then((a.kx, a.ky, a.mz).cmp(&(b.kx, b.ky, b.mz)))
    });
    let lambda1 = all[0].lambda;
    if lambda1 <= 0.0 {
        return Err(Error::Eigen(format!(
            "smallest eigenvalue {lambda1} is not positive"
        )));
    }
    let retained: Vec<ModeIndex> = all.into_iter().take_while(|m| m.lambda <= cutoff).collect();
    if retained.is_empty() {
        log::warn!("no eigenvalue below h^-2 = {cutoff:.3e}; the modal interpolant is zero");
    }
    let mut mask = Array3::from_elem((x.len(), y.len(), z.len()), false);
    for m in &retained {
        mask[[m.kx, m.ky, m.mz]] = true;
    }
    Ok(ModalBasis {
        domain: d,
        h,
        x,
        y,
        z,
        retained,
        lambda1,
        mask,
    })
}

impl ModalBasis {
    pub fn mode_count(&self) -> usize {
        self.retained.len()
    }

    /// Coefficients of `f` against every basis function, `[kx, ky, mz]`.
    pub fn analyze(&self, f: &Array3<f64>) -> Array3<f64> {
        let c = transform_axis(f, 0, &self.x.forward_matrix());
        let c = transform_axis(&c, 1, &self.y.forward_matrix());
        transform_axis(&c, 2, &self.z.forward_matrix())
    }

    pub fn synthesize(&self, c: &Array3<f64>) -> Array3<f64> {
        let f = transform_axis(c, 0, &self.x.inverse_matrix());
        let f = transform_axis(&f, 1, &self.y.inverse_matrix());
        transform_axis(&f, 2, &self.z.inverse_matrix())
    }

    /// Orthogonal projection onto the retained span.
    pub fn project(&self, f: &ScalarField3D) -> ScalarField3D {
        let mut c = self.analyze(&f.values);
        ndarray::Zip::from(&mut c)
            .and(&self.mask)
            .for_each(|v, &keep| {
                if !keep {
                    *v = 0.0
                }
            });
        ScalarField3D {
            domain: f.domain,
            values: self.synthesize(&c),
        }
    }

    /// Basis function for one mode as a field.
    pub fn mode_field(&self, kx: usize, ky: usize, mz: usize) -> ScalarField3D {
        let (a, b, c) = (&self.x.vectors[kx], &self.y.vectors[ky], &self.z.vectors[mz]);
        let values = Array3::from_shape_fn(self.domain.shape3(), |(i, j, k)| a[i] * b[j] * c[k]);
        ScalarField3D {
            domain: self.domain,
            values,
        }
    }

    /// CSV with columns `j, lambda, kx, ky, mz` (retained modes, `j` from 1).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::fs::File::create(path)?;
        self.write_csv_to(&mut out)
    }

    pub fn write_csv_to(&self, out: &mut impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["j", "lambda", "kx", "ky", "mz"])?;
        for (j, m) in self.retained.iter().enumerate() {
            w.write_record([
                (j + 1).to_string(),
                crate::field::fmt_f64(m.lambda),
                m.kx.to_string(),
                m.ky.to_string(),
                m.mz.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
