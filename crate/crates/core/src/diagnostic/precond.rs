//! Exact block inverse of the saddle operator through vertical cosine modes.
//!
//! Every horizontal term, the Coriolis coupling and the surface pressure are
//! independent of depth, and `-∂²_z` with Neumann ghosts is diagonalized by
//! the discrete cosines. The depth-sum constraint only sees the constant
//! mode, so the operator splits into one 2D saddle system (mode 0, with
//! `p_s`) and `Nz` decoupled 2D velocity systems. Each is a banded matrix in
//! node-interleaved ordering and is factorized once.

use super::operator::{is_pin, SaddleOperator};
use crate::error::Result;
use crate::linalg::modes::neumann_modes;
use crate::linalg::{BandLu, BandMatrix};

#[derive(Debug, Clone)]
pub(crate) struct ModalPreconditioner {
    /// `weighted[m][k] = w_k φ_m(k)`.
    weighted: Vec<Vec<f64>>,
    /// `phi[m][k] = φ_m(k)`.
    phi: Vec<Vec<f64>>,
    lus: Vec<BandLu>,
    n2: usize,
    nz1: usize,
}

impl ModalPreconditioner {
    pub fn new(op: &SaddleOperator) -> Result<Self> {
        let modes = neumann_modes(op.nz, op.dz);
        let weighted: Vec<Vec<f64>> = modes
            .vectors
            .iter()
            .map(|v| v.iter().zip(&modes.weights).map(|(a, w)| a * w).collect())
            .collect();
        // ⟨φ_0, 1⟩ in the weighted product, i.e. √H.
        let sqrt_h: f64 = weighted[0].iter().sum();
        let mut lus = Vec::with_capacity(op.nz + 1);
        for (m, &kappa) in modes.eigenvalues.iter().enumerate() {
            let coupling = if m == 0 { Some(sqrt_h) } else { None };
            lus.push(assemble_mode(op, kappa, coupling).factor()?);
        }
        Ok(Self {
            weighted,
            phi: modes.vectors,
            lus,
            n2: op.n2(),
            nz1: op.nz + 1,
        })
    }

    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        let (n2, nz1) = (self.n2, self.nz1);
        let n3 = n2 * nz1;
        for (m, lu) in self.lus.iter().enumerate() {
            let c = if m == 0 { 3 } else { 2 };
            let wm = &self.weighted[m];
            let mut b = vec![0.0; n2 * c];
            for node in 0..n2 {
                let col1 = &r[node * nz1..(node + 1) * nz1];
                let col2 = &r[n3 + node * nz1..n3 + (node + 1) * nz1];
                b[node * c] = col1.iter().zip(wm).map(|(a, w)| a * w).sum();
                b[node * c + 1] = col2.iter().zip(wm).map(|(a, w)| a * w).sum();
                if m == 0 {
                    b[node * c + 2] = r[2 * n3 + node];
                }
            }
            lu.solve(&mut b);
            let phi = &self.phi[m];
            for node in 0..n2 {
                let (c1, c2) = (b[node * c], b[node * c + 1]);
                for k in 0..nz1 {
                    let (a, bb) = (node * nz1 + k, n3 + node * nz1 + k);
                    if m == 0 {
                        z[a] = c1 * phi[k];
                        z[bb] = c2 * phi[k];
                    } else {
                        z[a] += c1 * phi[k];
                        z[bb] += c2 * phi[k];
                    }
                }
                if m == 0 {
                    z[2 * n3 + node] = b[node * c + 2];
                }
            }
        }
    }
}

/// Band matrix for one vertical mode with eigenvalue `kappa`. `coupling`
/// carries `⟨φ_0, 1⟩` for the constant mode, which owns the pressure.
fn assemble_mode(op: &SaddleOperator, kappa: f64, coupling: Option<f64>) -> BandMatrix {
    let (nx, ny) = (op.nx, op.ny);
    let c = if coupling.is_some() { 3 } else { 2 };
    let n = op.n2() * c;
    let bw = c * (ny + 1) + (c - 1);
    let mut a = BandMatrix::new(n, bw, bw);
    let idx = |i: usize, j: usize, comp: usize| (i * (ny + 1) + j) * c + comp;
    let (ix2, iy2) = (1.0 / (op.dx * op.dx), 1.0 / (op.dy * op.dy));
    // Neumann-lane neighbors: (index, weight) pairs of the `-f''` row.
    let neumann = |i: usize, n: usize| -> Vec<(usize, f64)> {
        if i == 0 {
            vec![(1, -2.0)]
        } else if i == n {
            vec![(n - 1, -2.0)]
        } else {
            vec![(i - 1, -1.0), (i + 1, -1.0)]
        }
    };
    let dirichlet = |i: usize, n: usize| -> Vec<(usize, f64)> {
        [i - 1, i + 1]
            .into_iter()
            .filter(|&k| k != 0 && k != n)
            .map(|k| (k, -1.0))
            .collect()
    };
    for i in 0..=nx {
        for j in 0..=ny {
            let f = op.coriolis[j];
            let r = idx(i, j, 0);
            if i == 0 || i == nx {
                a.add(r, r, 1.0);
            } else {
                a.add(r, r, op.a_h * 2.0 * (ix2 + iy2) + op.a_v * kappa);
                for (ii, w) in dirichlet(i, nx) {
                    a.add(r, idx(ii, j, 0), op.a_h * w * ix2);
                }
                for (jj, w) in neumann(j, ny) {
                    a.add(r, idx(i, jj, 0), op.a_h * w * iy2);
                }
                if j != 0 && j != ny {
                    a.add(r, idx(i, j, 1), -f);
                }
                if let Some(s) = coupling {
                    a.add(r, idx(i + 1, j, 2), s / (2.0 * op.dx));
                    a.add(r, idx(i - 1, j, 2), -s / (2.0 * op.dx));
                }
            }
            let r = idx(i, j, 1);
            if j == 0 || j == ny {
                a.add(r, r, 1.0);
            } else {
                a.add(r, r, op.a_h * 2.0 * (ix2 + iy2) + op.a_v * kappa);
                for (ii, w) in neumann(i, nx) {
                    a.add(r, idx(ii, j, 1), op.a_h * w * ix2);
                }
                for (jj, w) in dirichlet(j, ny) {
                    a.add(r, idx(i, jj, 1), op.a_h * w * iy2);
                }
                if i != 0 && i != nx {
                    a.add(r, idx(i, j, 0), f);
                }
                if let Some(s) = coupling {
                    a.add(r, idx(i, j + 1, 2), s / (2.0 * op.dy));
                    a.add(r, idx(i, j - 1, 2), -s / (2.0 * op.dy));
                }
            }
            if let Some(s) = coupling {
                let r = idx(i, j, 2);
                if is_pin(i, j) {
                    a.add(r, r, 1.0);
                    continue;
                }
                for (ii, w) in div_weights(i, nx, op.dx) {
                    a.add(r, idx(ii, j, 0), s * w);
                }
                for (jj, w) in div_weights(j, ny, op.dy) {
                    a.add(r, idx(i, jj, 1), s * w);
                }
            }
        }
    }
    a
}

/// Coefficients of the wall-flux divergence row at index `i`.
fn div_weights(i: usize, n: usize, d: f64) -> Vec<(usize, f64)> {
    if i == 0 {
        vec![(1, 1.0 / d)]
    } else if i == n {
        vec![(n - 1, -1.0 / d)]
    } else {
        let mut v = Vec::new();
        if i + 1 != n {
            v.push((i + 1, 0.5 / d));
        }
        if i - 1 != 0 {
            v.push((i - 1, -0.5 / d));
        }
        v
    }
}
