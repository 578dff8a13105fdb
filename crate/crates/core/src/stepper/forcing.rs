use crate::diagnostic::WindStress;
use crate::error::{Error, Result};
use crate::field::stencil::neg_laplacian_2d;
use crate::field::{PhysParams, ScalarField2D, ScalarField3D};

/// Static forcing: heat source `Q`, surface temperature `T*`, wind stress
/// `τ` and the derived source `Q* = Q + K_h ΔT*`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForcingSpec {
    pub q: ScalarField3D,
    pub tstar: ScalarField2D,
    pub tau: WindStress,
    pub qstar: ScalarField3D,
}

impl ForcingSpec {
    pub fn new(
        q: ScalarField3D,
        tstar: ScalarField2D,
        tau: WindStress,
        p: &PhysParams,
    ) -> Result<Self> {
        let qstar = compute_qstar(&q, &tstar, p)?;
        Ok(Self {
            q,
            tstar,
            tau,
            qstar,
        })
    }

    pub fn zeros(domain: crate::field::DomainSpec) -> Self {
        Self {
            q: ScalarField3D::zeros(domain),
            tstar: ScalarField2D::zeros(domain),
            tau: WindStress::zeros(domain),
            qstar: ScalarField3D::zeros(domain),
        }
    }
}

/// Largest one-sided second-order normal derivative of `T*` on the walls.
pub fn compatibility_defect(tstar: &ScalarField2D) -> f64 {
    let d = tstar.domain;
    let t = &tstar.values;
    let (nx, ny) = (d.nx, d.ny);
    let mut worst = 0.0f64;
    for j in 0..=ny {
        let left = (-3.0 * t[[0, j]] + 4.0 * t[[1, j]] - t[[2, j]]) / (2.0 * d.dx());
        let right = (3.0 * t[[nx, j]] - 4.0 * t[[nx - 1, j]] + t[[nx - 2, j]]) / (2.0 * d.dx());
        worst = worst.max(left.abs()).max(right.abs());
    }
    for i in 0..=nx {
        let bottom = (-3.0 * t[[i, 0]] + 4.0 * t[[i, 1]] - t[[i, 2]]) / (2.0 * d.dy());
        let top = (3.0 * t[[i, ny]] - 4.0 * t[[i, ny - 1]] + t[[i, ny - 2]]) / (2.0 * d.dy());
        worst = worst.max(bottom.abs()).max(top.abs());
    }
    worst
}

/// `Q* = Q + K_h ΔT*`, with `ΔT*` taken under Neumann walls and extended
/// uniformly in depth. Logs a warning when `T*` visibly violates
/// `∂T*/∂n = 0`.
pub fn compute_qstar(q: &ScalarField3D, tstar: &ScalarField2D, p: &PhysParams) -> Result<ScalarField3D> {
    let d = q.domain;
    if tstar.values.dim() != d.shape2() {
        let (a, b) = d.shape2();
        return Err(Error::ShapeMismatch {
            expected: vec![a, b],
            found: tstar.values.shape().to_vec(),
        });
    }
    q.check_finite("Q")?;
    tstar.check_finite("Tstar")?;
    let defect = compatibility_defect(tstar);
    let (lo, hi) = tstar
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let tolerance = 0.05 * (hi - lo) / d.lx.min(d.ly);
    if defect > tolerance {
        log::warn!(
            "surface temperature violates the no-flux compatibility condition: \
             max |dT*/dn| = {defect:.3e} on the walls"
        );
    }
    let lap = neg_laplacian_2d(&tstar.values, d.dx(), d.dy());
    let mut out = q.clone();
    for ((i, j, _), v) in out.values.indexed_iter_mut() {
        *v -= p.k_h * lap[[i, j]];
    }
    Ok(out)
}
