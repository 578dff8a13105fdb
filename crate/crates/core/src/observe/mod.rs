//! Observation operators `I_h` and empirical checks of the approximation
//! property `|f - I_h f|² ≤ c₀ h² ‖f‖²_{H¹}`.
//!
//! Two kinds are provided:
//! - `modal`: orthogonal projection onto the eigenfunctions of `-Δ` (with
//!   the temperature boundary conditions) whose eigenvalue is at most
//!   `h⁻²`. The eigenfunctions are tensor products of discrete cosines in
//!   `x`, `y` and the vertical Robin/Neumann modes.
//! - `volume`: weighted means over a grid of `⌈L/h⌉` boxes per axis,
//!   including depth.
//!
//! Both are orthogonal projections in the trapezoid inner product, hence
//! linear, idempotent and non-expansive.

mod basis;
mod sample;
mod volume;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, FieldIssue, Result};
use crate::field::{h1_norm_scalar, l2_norm, DomainSpec, PhysParams, ScalarField3D};

pub use basis::{build_modal_basis, ModalBasis, ModeIndex};
pub use sample::SmoothSampler;
pub use volume::VolumeBoxes;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterpolantKind {
    Modal,
    Volume,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterpolantSpec {
    pub kind: InterpolantKind,
    pub h: f64,
    /// Approximation constant; `None` means "measure it".
    #[serde(default)]
    pub c0: Option<f64>,
}

impl Default for InterpolantSpec {
    fn default() -> Self {
        Self {
            kind: InterpolantKind::Modal,
            h: 0.25,
            c0: None,
        }
    }
}

impl InterpolantSpec {
    pub fn validate(&self, d: &DomainSpec, prefix: &str, issues: &mut Vec<FieldIssue>) {
        let limit = d.lx.min(d.ly).min(d.h);
        if !(self.h > 0.0 && self.h <= limit) {
            issues.push(FieldIssue::new(
                format!("{prefix}h"),
                format!("must lie in (0, {limit}]"),
            ));
        }
        if let Some(c0) = self.c0 {
            if !(c0 > 0.0 && c0.is_finite()) {
                issues.push(FieldIssue::new(format!("{prefix}c0"), "must be positive"));
            }
        }
    }

    /// Box counts per axis for the volume kind.
    pub fn box_counts(&self, d: &DomainSpec) -> [usize; 3] {
        VolumeBoxes::new(d, self.h).counts
    }
}

/// A ready-to-apply observation operator.
#[derive(Debug, Clone)]
pub enum Interpolant {
    Modal(ModalBasis),
    Volume(VolumeBoxes),
}

impl Interpolant {
    pub fn new(spec: &InterpolantSpec, d: DomainSpec, p: &PhysParams) -> Result<Self> {
        let mut issues = Vec::new();
        spec.validate(&d, "interpolant.", &mut issues);
        if !issues.is_empty() {
            return Err(Error::Config(issues));
        }
        Ok(match spec.kind {
            InterpolantKind::Modal => Interpolant::Modal(build_modal_basis(d, p, spec.h)?),
            InterpolantKind::Volume => Interpolant::Volume(VolumeBoxes::new(&d, spec.h)),
        })
    }

    pub fn apply(&self, f: &ScalarField3D) -> Result<ScalarField3D> {
        f.check_finite("f")?;
        match self {
            Interpolant::Modal(b) => {
                check_domain(&b.domain, f)?;
                Ok(b.project(f))
            }
            Interpolant::Volume(v) => Ok(v.average(f)),
        }
    }

    pub fn basis(&self) -> Option<&ModalBasis> {
        match self {
            Interpolant::Modal(b) => Some(b),
            Interpolant::Volume(_) => None,
        }
    }
}

fn check_domain(d: &DomainSpec, f: &ScalarField3D) -> Result<()> {
    if f.domain != *d {
        let (a, b, c) = d.shape3();
        return Err(Error::ShapeMismatch {
            expected: vec![a, b, c],
            found: f.values.shape().to_vec(),
        });
    }
    Ok(())
}

/// `I_h f`. The modal kind needs its basis; the volume kind ignores it.
pub fn apply_interpolant(
    f: &ScalarField3D,
    spec: &InterpolantSpec,
    basis: Option<&ModalBasis>,
) -> Result<ScalarField3D> {
    f.check_finite("f")?;
    match spec.kind {
        InterpolantKind::Modal => {
            let b = basis.ok_or_else(|| Error::InvalidField {
                name: "basis".into(),
                reason: "the modal interpolant needs a basis".into(),
            })?;
            check_domain(&b.domain, f)?;
            Ok(b.project(f))
        }
        InterpolantKind::Volume => Ok(VolumeBoxes::new(&f.domain, spec.h).average(f)),
    }
}

/// `|f - I_h f|² / (h² ‖f‖²_{H¹})`.
pub fn approximation_ratio(f: &ScalarField3D, ih: &Interpolant, h: f64) -> Result<f64> {
    let err = l2_norm(&f.sub(&ih.apply(f)?))?;
    let h1 = h1_norm_scalar(f)?;
    if h1 == 0.0 {
        return Ok(0.0);
    }
    Ok(err * err / (h * h * h1 * h1))
}

/// Largest approximation ratio over `n_samples` seeded smooth fields.
pub fn measure_c0(
    spec: &InterpolantSpec,
    d: DomainSpec,
    p: &PhysParams,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    if n_samples == 0 {
        return Err(Error::Config(vec![FieldIssue::new(
            "n_samples",
            "must be at least 1",
        )]));
    }
    let ih = Interpolant::new(spec, d, p)?;
    let sampler = SmoothSampler::new(d, p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..n_samples {
        let f = sampler.draw(&mut rng, None);
        worst = worst.max(approximation_ratio(&f, &ih, spec.h)?);
    }
    Ok(worst)
}
