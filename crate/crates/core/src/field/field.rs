use ndarray::{Array2, Array3, Zip};

use super::DomainSpec;
use crate::error::{Error, Result};

/// Scalar on the 3D node lattice, shape `(nx+1, ny+1, nz+1)`, z fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField3D {
    pub domain: DomainSpec,
    pub values: Array3<f64>,
}

/// Scalar on the surface lattice `(nx+1, ny+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField2D {
    pub domain: DomainSpec,
    pub values: Array2<f64>,
}

/// Horizontal velocity pair `(u₁, u₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField2x3D {
    pub u1: ScalarField3D,
    pub u2: ScalarField3D,
}

impl ScalarField3D {
    pub fn zeros(domain: DomainSpec) -> Self {
        Self {
            domain,
            values: Array3::zeros(domain.shape3()),
        }
    }

    pub fn constant(domain: DomainSpec, c: f64) -> Self {
        Self {
            domain,
            values: Array3::from_elem(domain.shape3(), c),
        }
    }

    /// Samples `f(x, y, z)` at every node.
    pub fn from_fn(domain: DomainSpec, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let values = Array3::from_shape_fn(domain.shape3(), |(i, j, k)| {
            f(domain.x(i), domain.y(j), domain.z(k))
        });
        Self { domain, values }
    }

    pub fn from_array(domain: DomainSpec, values: Array3<f64>) -> Result<Self> {
        let (a, b, c) = domain.shape3();
        if values.shape() != [a, b, c] {
            return Err(Error::ShapeMismatch {
                expected: vec![a, b, c],
                found: values.shape().to_vec(),
            });
        }
        Ok(Self { domain, values })
    }

    /// Replicates a surface field along z.
    pub fn from_surface(surface: &ScalarField2D) -> Self {
        let d = surface.domain;
        let values = Array3::from_shape_fn(d.shape3(), |(i, j, _)| surface.values[[i, j]]);
        Self { domain: d, values }
    }

    pub fn check_finite(&self, name: &str) -> Result<()> {
        if self.values.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidField {
                name: name.to_string(),
                reason: "contains non-finite values".into(),
            })
        }
    }

    pub fn check_same_grid(&self, other: &ScalarField3D) -> Result<()> {
        if self.domain != other.domain || self.values.dim() != other.values.dim() {
            return Err(Error::ShapeMismatch {
                expected: self.values.shape().to_vec(),
                found: other.values.shape().to_vec(),
            });
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &ScalarField3D) -> ScalarField3D {
        let mut out = self.clone();
        out.add_scaled(a, other);
        out
    }

    pub fn add_scaled(&mut self, a: f64, other: &ScalarField3D) {
        Zip::from(&mut self.values)
            .and(&other.values)
            .for_each(|s, &o| *s += a * o);
    }

    pub fn scaled(&self, a: f64) -> ScalarField3D {
        ScalarField3D {
            domain: self.domain,
            values: &self.values * a,
        }
    }

    pub fn sub(&self, other: &ScalarField3D) -> ScalarField3D {
        self.axpy(-1.0, other)
    }

    /// Values at the surface layer `z = 0`.
    pub fn surface(&self) -> ScalarField2D {
        let nz = self.domain.nz;
        ScalarField2D {
            domain: self.domain,
            values: self.values.index_axis(ndarray::Axis(2), nz).to_owned(),
        }
    }
}

impl ScalarField2D {
    pub fn zeros(domain: DomainSpec) -> Self {
        Self {
            domain,
            values: Array2::zeros(domain.shape2()),
        }
    }

    pub fn constant(domain: DomainSpec, c: f64) -> Self {
        Self {
            domain,
            values: Array2::from_elem(domain.shape2(), c),
        }
    }

    pub fn from_fn(domain: DomainSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let values =
            Array2::from_shape_fn(domain.shape2(), |(i, j)| f(domain.x(i), domain.y(j)));
        Self { domain, values }
    }

    pub fn check_finite(&self, name: &str) -> Result<()> {
        if self.values.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidField {
                name: name.to_string(),
                reason: "contains non-finite values".into(),
            })
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Trapezoid-weighted mean over `M`.
    pub fn mean(&self) -> f64 {
        let wx = self.domain.weights_x();
        let wy = self.domain.weights_y();
        let mut s = 0.0;
        for (i, &ax) in wx.iter().enumerate() {
            for (j, &ay) in wy.iter().enumerate() {
                s += ax * ay * self.values[[i, j]];
            }
        }
        s / self.domain.area()
    }
}

impl VectorField2x3D {
    pub fn zeros(domain: DomainSpec) -> Self {
        Self {
            u1: ScalarField3D::zeros(domain),
            u2: ScalarField3D::zeros(domain),
        }
    }

    pub fn new(u1: ScalarField3D, u2: ScalarField3D) -> Result<Self> {
        u1.check_same_grid(&u2)?;
        Ok(Self { u1, u2 })
    }

    pub fn domain(&self) -> DomainSpec {
        self.u1.domain
    }

    pub fn check_finite(&self, name: &str) -> Result<()> {
        self.u1.check_finite(&format!("{name}.u1"))?;
        self.u2.check_finite(&format!("{name}.u2"))
    }

    /// `max(|u₁|, |u₂|)` over all nodes.
    pub fn max_abs(&self) -> f64 {
        self.u1.max_abs().max(self.u2.max_abs())
    }

    pub fn sub(&self, other: &VectorField2x3D) -> VectorField2x3D {
        VectorField2x3D {
            u1: self.u1.sub(&other.u1),
            u2: self.u2.sub(&other.u2),
        }
    }
}
