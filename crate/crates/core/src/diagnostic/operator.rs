//! Matrix-free saddle-point operator for the diagnostic momentum balance.
//!
//! Unknown vector layout: `[u₁ (all nodes), u₂ (all nodes), p_s (surface)]`,
//! each block in the lattice's z-fastest order. Row types:
//!
//! - `u₁` on `x`-walls and `u₂` on `y`-walls: identity rows (`u·n = 0`);
//!   these values are never read by any other row.
//! - other momentum rows: `A_h(-Δ_h) + A_v(-∂²_z) ∓ f u_⊥ + ∇p_s`, with
//!   Neumann ghosts for the tangential derivative on the walls, Neumann at
//!   the bottom and the wind stress folded into the right-hand side at the
//!   top.
//! - surface rows: `∇·Σ_k w_k u_k` with the wall-flux divergence stencil,
//!   except at the four nodes `(0..2, 0..2)` which pin one value of `p_s`
//!   per checkerboard class of the centered gradient's kernel.

use crate::field::DomainSpec;

#[derive(Debug, Clone)]
pub(crate) struct SaddleOperator {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
    pub a_h: f64,
    pub a_v: f64,
    pub wz: Vec<f64>,
    /// Coriolis parameter at each `y` row.
    pub coriolis: Vec<f64>,
}

pub(crate) fn is_pin(i: usize, j: usize) -> bool {
    i < 2 && j < 2
}

/// Wall-flux divergence `D` at index `i` of a lane whose end values are
/// treated as zero.
pub(crate) fn wall_div(v: impl Fn(usize) -> f64, i: usize, n: usize, d: f64) -> f64 {
    let inner = |k: usize| if k == 0 || k == n { 0.0 } else { v(k) };
    if i == 0 {
        v(1) / d
    } else if i == n {
        -v(n - 1) / d
    } else {
        (inner(i + 1) - inner(i - 1)) / (2.0 * d)
    }
}

/// Neumann `-f''` at index `i` with mirrored ghosts.
fn neumann_lap(v: impl Fn(usize) -> f64, i: usize, n: usize, d: f64) -> f64 {
    let c = v(i);
    let s = if i == 0 {
        2.0 * (c - v(1))
    } else if i == n {
        2.0 * (c - v(n - 1))
    } else {
        2.0 * c - v(i - 1) - v(i + 1)
    };
    s / (d * d)
}

/// Dirichlet `-f''` at interior index `i`, end values treated as zero.
fn dirichlet_lap(v: impl Fn(usize) -> f64, i: usize, n: usize, d: f64) -> f64 {
    let inner = |k: usize| if k == 0 || k == n { 0.0 } else { v(k) };
    (2.0 * v(i) - inner(i - 1) - inner(i + 1)) / (d * d)
}

impl SaddleOperator {
    pub fn new(d: &DomainSpec, a_h: f64, a_v: f64, coriolis: Vec<f64>) -> Self {
        Self {
            nx: d.nx,
            ny: d.ny,
            nz: d.nz,
            dx: d.dx(),
            dy: d.dy(),
            dz: d.dz(),
            a_h,
            a_v,
            wz: d.weights_z(),
            coriolis,
        }
    }

    pub fn n3(&self) -> usize {
        (self.nx + 1) * (self.ny + 1) * (self.nz + 1)
    }

    pub fn n2(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    pub fn len(&self) -> usize {
        2 * self.n3() + self.n2()
    }

    #[inline]
    pub fn at3(&self, i: usize, j: usize, k: usize) -> usize {
        (i * (self.ny + 1) + j) * (self.nz + 1) + k
    }

    #[inline]
    pub fn at2(&self, i: usize, j: usize) -> usize {
        i * (self.ny + 1) + j
    }

    /// `Σ_k w_k u(i, j, k)` for every surface node.
    pub fn depth_sum(&self, u: &[f64]) -> Vec<f64> {
        let nz1 = self.nz + 1;
        u.chunks_exact(nz1)
            .map(|col| col.iter().zip(&self.wz).map(|(a, w)| a * w).sum())
            .collect()
    }

    /// Constraint value `∇·Σ_k w_k u_k` at surface node `(i, j)`.
    pub fn constraint_at(&self, s1: &[f64], s2: &[f64], i: usize, j: usize) -> f64 {
        wall_div(|a| s1[self.at2(a, j)], i, self.nx, self.dx)
            + wall_div(|b| s2[self.at2(i, b)], j, self.ny, self.dy)
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let (nx, ny, nz) = (self.nx, self.ny, self.nz);
        let n3 = self.n3();
        let (u1, rest) = x.split_at(n3);
        let (u2, p) = rest.split_at(n3);
        let (y1, rest) = y.split_at_mut(n3);
        let (y2, yp) = rest.split_at_mut(n3);
        for i in 0..=nx {
            for j in 0..=ny {
                let f = self.coriolis[j];
                let gx = if i == 0 || i == nx {
                    0.0
                } else {
                    (p[self.at2(i + 1, j)] - p[self.at2(i - 1, j)]) / (2.0 * self.dx)
                };
                let gy = if j == 0 || j == ny {
                    0.0
                } else {
                    (p[self.at2(i, j + 1)] - p[self.at2(i, j - 1)]) / (2.0 * self.dy)
                };
                for k in 0..=nz {
                    let c = self.at3(i, j, k);
                    y1[c] = if i == 0 || i == nx {
                        u1[c]
                    } else {
                        let h = dirichlet_lap(|a| u1[self.at3(a, j, k)], i, nx, self.dx)
                            + neumann_lap(|b| u1[self.at3(i, b, k)], j, ny, self.dy);
                        let v = neumann_lap(|m| u1[self.at3(i, j, m)], k, nz, self.dz);
                        let cor = if j == 0 || j == ny { 0.0 } else { -f * u2[c] };
                        self.a_h * h + self.a_v * v + cor + gx
                    };
                    y2[c] = if j == 0 || j == ny {
                        u2[c]
                    } else {
                        let h = neumann_lap(|a| u2[self.at3(a, j, k)], i, nx, self.dx)
                            + dirichlet_lap(|b| u2[self.at3(i, b, k)], j, ny, self.dy);
                        let v = neumann_lap(|m| u2[self.at3(i, j, m)], k, nz, self.dz);
                        let cor = if i == 0 || i == nx { 0.0 } else { f * u1[c] };
                        self.a_h * h + self.a_v * v + cor + gy
                    };
                }
            }
        }
        let s1 = self.depth_sum(u1);
        let s2 = self.depth_sum(u2);
        for i in 0..=nx {
            for j in 0..=ny {
                let c = self.at2(i, j);
                yp[c] = if is_pin(i, j) {
                    p[c]
                } else {
                    self.constraint_at(&s1, &s2, i, j)
                };
            }
        }
    }
}
