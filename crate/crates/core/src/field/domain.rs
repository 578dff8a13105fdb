use serde::{Deserialize, Serialize};

use crate::error::FieldIssue;

/// Box domain `M × (-H, 0)` with `M = (0, Lx) × (0, Ly)` and its cell counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub lx: f64,
    pub ly: f64,
    /// Depth `H`.
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
}

impl Default for DomainSpec {
    fn default() -> Self {
        Self {
            lx: 1.0,
            ly: 1.0,
            h: 1.0,
            nx: 24,
            ny: 24,
            nz: 12,
        }
    }
}

impl DomainSpec {
    pub fn new(lx: f64, ly: f64, h: f64, nx: usize, ny: usize, nz: usize) -> Self {
        Self {
            lx,
            ly,
            h,
            nx,
            ny,
            nz,
        }
    }

    /// Unit square, unit depth.
    pub fn unit(nx: usize, ny: usize, nz: usize) -> Self {
        Self::new(1.0, 1.0, 1.0, nx, ny, nz)
    }

    pub fn validate(&self, prefix: &str, issues: &mut Vec<FieldIssue>) {
        for (name, v) in [("lx", self.lx), ("ly", self.ly), ("h", self.h)] {
            if !(v.is_finite() && v > 0.0) {
                issues.push(FieldIssue::new(
                    format!("{prefix}.{name}"),
                    format!("must be finite and > 0 (got {v})"),
                ));
            }
        }
        for (name, n) in [("nx", self.nx), ("ny", self.ny), ("nz", self.nz)] {
            if n < 4 {
                issues.push(FieldIssue::new(
                    format!("{prefix}.{name}"),
                    format!("must be >= 4 (got {n})"),
                ));
            }
        }
    }

    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }
    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }
    pub fn dz(&self) -> f64 {
        self.h / self.nz as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }
    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.dy()
    }
    /// Node depth coordinate; `z(0) = -H`, `z(nz) = 0`.
    pub fn z(&self, k: usize) -> f64 {
        -self.h + k as f64 * self.dz()
    }

    pub fn shape3(&self) -> (usize, usize, usize) {
        (self.nx + 1, self.ny + 1, self.nz + 1)
    }
    pub fn shape2(&self) -> (usize, usize) {
        (self.nx + 1, self.ny + 1)
    }
    pub fn n_nodes(&self) -> usize {
        (self.nx + 1) * (self.ny + 1) * (self.nz + 1)
    }

    pub fn weights_x(&self) -> Vec<f64> {
        trapezoid_weights(self.nx, self.dx())
    }
    pub fn weights_y(&self) -> Vec<f64> {
        trapezoid_weights(self.ny, self.dy())
    }
    pub fn weights_z(&self) -> Vec<f64> {
        trapezoid_weights(self.nz, self.dz())
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }
    pub fn volume(&self) -> f64 {
        self.lx * self.ly * self.h
    }

    /// Same box, every cell count multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            nx: self.nx * factor,
            ny: self.ny * factor,
            nz: self.nz * factor,
            ..*self
        }
    }
}

/// Trapezoid weights on `n + 1` equispaced nodes.
pub(crate) fn trapezoid_weights(n: usize, d: f64) -> Vec<f64> {
    let mut w = vec![d; n + 1];
    w[0] = 0.5 * d;
    w[n] = 0.5 * d;
    w
}
