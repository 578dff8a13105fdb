//! One-dimensional discrete eigenbases for the grid operators.
//!
//! Vectors are orthonormal in the trapezoid-weighted inner product of the
//! node grid, so projections are plain weighted sums.

use nalgebra::DMatrix;
use ndarray::{Array2, Array3};

use crate::error::{Error, Result};
use crate::field::stencil::map_lanes;
use crate::field::trapezoid_weights;

#[derive(Debug, Clone)]
pub struct Modes1D {
    pub eigenvalues: Vec<f64>,
    /// `vectors[m][i]`: value of mode `m` at node `i`.
    pub vectors: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl Modes1D {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Weighted coefficient of `f` against mode `m`.
    pub fn project(&self, m: usize, f: &[f64]) -> f64 {
        self.vectors[m]
            .iter()
            .zip(f)
            .zip(&self.weights)
            .map(|((v, f), w)| v * f * w)
            .sum()
    }
}

/// Eigenpairs of the Neumann second-difference operator on `n + 1` nodes:
/// `cos(m pi i / n)` with eigenvalue `(2 - 2 cos(m pi / n)) / d^2`.
pub fn neumann_modes(n: usize, d: f64) -> Modes1D {
    let weights = trapezoid_weights(n, d);
    let mut eigenvalues = Vec::with_capacity(n + 1);
    let mut vectors = Vec::with_capacity(n + 1);
    for m in 0..=n {
        let theta = m as f64 * std::f64::consts::PI / n as f64;
        let mut v: Vec<f64> = (0..=n).map(|i| (theta * i as f64).cos()).collect();
        let nrm: f64 = v
            .iter()
            .zip(&weights)
            .map(|(v, w)| v * v * w)
            .sum::<f64>()
            .sqrt();
        v.iter_mut().for_each(|x| *x /= nrm);
        eigenvalues.push((2.0 - 2.0 * theta.cos()) / (d * d));
        vectors.push(v);
    }
    Modes1D {
        eigenvalues,
        vectors,
        weights,
    }
}

/// Eigenpairs of the vertical second-difference operator with a Neumann
/// condition at node 0 and the Robin condition `f' + a f = 0` at node `n`,
/// sorted by ascending eigenvalue. Each vector is positive at node 0.
pub fn robin_modes(n: usize, d: f64, a: f64) -> Result<Modes1D> {
    let weights = trapezoid_weights(n, d);
    let s: Vec<f64> = weights.iter().map(|w| (w / d).sqrt()).collect();
    let inv_d2 = 1.0 / (d * d);
    // Operator rows (scaled by d^2): row 0 = [2, -2], interior [-1, 2, -1],
    // row n = [-2, 2 + 2 a d]. Symmetrize with the square-root weights.
    let mut mat = DMatrix::<f64>::zeros(n + 1, n + 1);
    for i in 0..=n {
        let diag = if i == n { 2.0 + 2.0 * a * d } else { 2.0 };
        mat[(i, i)] = diag * inv_d2;
        if i < n {
            let a_ij = if i == 0 { -2.0 } else { -1.0 } * inv_d2;
            let sym = s[i] * a_ij / s[i + 1];
            mat[(i, i + 1)] = sym;
            mat[(i + 1, i)] = sym;
        }
    }
    if mat.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("non-finite vertical operator".into()));
    }
    let eig = mat.symmetric_eigen();
    let mut order: Vec<usize> = (0..=n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut eigenvalues = Vec::with_capacity(n + 1);
    let mut vectors = Vec::with_capacity(n + 1);
    for &c in &order {
        let lam = eig.eigenvalues[c];
        if !lam.is_finite() {
            return Err(Error::Eigen(format!("eigenvalue {lam} is not finite")));
        }
        let col = eig.eigenvectors.column(c);
        let mut v: Vec<f64> = (0..=n).map(|i| col[i] / (s[i] * d.sqrt())).collect();
        let nrm: f64 = v
            .iter()
            .zip(&weights)
            .map(|(v, w)| v * v * w)
            .sum::<f64>()
            .sqrt();
        let sign = if v[0] < 0.0 { -1.0 } else { 1.0 };
        v.iter_mut().for_each(|x| *x *= sign / nrm);
        eigenvalues.push(lam);
        vectors.push(v);
    }
    Ok(Modes1D {
        eigenvalues,
        vectors,
        weights,
    })
}

/// Applies `matrix` (square, `[out, in]`) along `axis` of every lane.
pub fn transform_axis(values: &Array3<f64>, axis: usize, matrix: &Array2<f64>) -> Array3<f64> {
    map_lanes(values, axis, |src, dst| {
        for (a, d) in dst.iter_mut().enumerate() {
            *d = matrix.row(a).iter().zip(src).map(|(m, s)| m * s).sum();
        }
    })
}

impl Modes1D {
    /// Analysis matrix `[m, i] = w_i φ_m(i)`.
    pub fn forward_matrix(&self) -> Array2<f64> {
        let n = self.weights.len();
        Array2::from_shape_fn((self.len(), n), |(m, i)| self.weights[i] * self.vectors[m][i])
    }

    /// Synthesis matrix `[i, m] = φ_m(i)`.
    pub fn inverse_matrix(&self) -> Array2<f64> {
        let n = self.weights.len();
        Array2::from_shape_fn((n, self.len()), |(i, m)| self.vectors[m][i])
    }
}
