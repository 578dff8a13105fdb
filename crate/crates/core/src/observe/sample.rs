use ndarray::Array3;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::field::{DomainSpec, PhysParams, ScalarField3D};
use crate::linalg::modes::{neumann_modes, robin_modes, transform_axis, Modes1D};

/// Random smooth fields: eigenfunction series up to half the grid's
/// wavenumbers per axis with independent normal amplitudes scaled by
/// `(1 + λ)^(-5/4)`, i.e. spectral variance `∝ (1 + λ)^(-5/2)`.
#[derive(Debug, Clone)]
pub struct SmoothSampler {
    domain: DomainSpec,
    x: Modes1D,
    y: Modes1D,
    z: Modes1D,
}

impl SmoothSampler {
    pub fn new(domain: DomainSpec, p: &PhysParams) -> Result<Self> {
        Ok(Self {
            domain,
            x: neumann_modes(domain.nx, domain.dx()),
            y: neumann_modes(domain.ny, domain.dy()),
            z: robin_modes(domain.nz, domain.dz(), p.robin())?,
        })
    }

    /// Draws one field; with `cutoff`, only modes with `λ ≤ cutoff` enter.
    pub fn draw(&self, rng: &mut impl Rng, cutoff: Option<f64>) -> ScalarField3D {
        self.draw_weighted(rng, |lambda| {
            if cutoff.is_some_and(|cut| lambda > cut) {
                0.0
            } else {
                (1.0 + lambda).powf(-1.25)
            }
        })
    }

    fn draw_weighted(&self, rng: &mut impl Rng, weight: impl Fn(f64) -> f64) -> ScalarField3D {
        let d = self.domain;
        let mut c = Array3::<f64>::zeros(d.shape3());
        for kx in 0..=d.nx / 2 {
            for ky in 0..=d.ny / 2 {
                for mz in 0..=d.nz / 2 {
                    let lambda =
                        self.x.eigenvalues[kx] + self.y.eigenvalues[ky] + self.z.eigenvalues[mz];
                    let g: f64 = rng.sample(StandardNormal);
                    c[[kx, ky, mz]] = g * weight(lambda);
                }
            }
        }
        let f = transform_axis(&c, 0, &self.x.inverse_matrix());
        let f = transform_axis(&f, 1, &self.y.inverse_matrix());
        let values = transform_axis(&f, 2, &self.z.inverse_matrix());
        ScalarField3D { domain: d, values }
    }
}
