//! Restarted, right-preconditioned GMRES (flexible variant: the preconditioned
//! directions are stored, so the preconditioner may be any linear map).

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct GmresSettings {
    /// Relative residual target `||b - A x|| <= tol ||b||`.
    pub tol: f64,
    pub restart: usize,
    pub max_iter: usize,
}

impl Default for GmresSettings {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            restart: 30,
            max_iter: 300,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `A x = b` starting from the contents of `x`.
pub fn gmres<A, M>(
    apply_a: A,
    apply_m: M,
    b: &[f64],
    x: &mut [f64],
    settings: GmresSettings,
) -> Result<GmresOutcome>
where
    A: Fn(&[f64], &mut [f64]),
    M: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.fill(0.0);
        return Ok(GmresOutcome {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let m = settings.restart.max(1);
    let mut iterations = 0usize;
    let mut r = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut v: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let mut z: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut h = vec![vec![0.0; m]; m + 1];
    let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
    let mut g = vec![0.0; m + 1];
    loop {
        apply_a(x, &mut r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        let beta = norm(&r);
        let rel = beta / bnorm;
        if !rel.is_finite() {
            return Err(Error::NoConvergence {
                residual: rel,
                iterations,
            });
        }
        if rel <= settings.tol {
            return Ok(GmresOutcome {
                iterations,
                relative_residual: rel,
            });
        }
        if iterations >= settings.max_iter {
            return Err(Error::NoConvergence {
                residual: rel,
                iterations,
            });
        }
        v.clear();
        z.clear();
        v.push(r.iter().map(|ri| ri / beta).collect());
        g.fill(0.0);
        g[0] = beta;
        let mut k = 0;
        while k < m && iterations < settings.max_iter {
            let mut zk = vec![0.0; n];
            apply_m(&v[k], &mut zk);
            apply_a(&zk, &mut w);
            z.push(zk);
            for i in 0..=k {
                let hik = dot(&w, &v[i]);
                h[i][k] = hik;
                for (wj, vj) in w.iter_mut().zip(&v[i]) {
                    *wj -= hik * vj;
                }
            }
            let hn = norm(&w);
            h[k + 1][k] = hn;
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let denom = h[k][k].hypot(h[k + 1][k]);
            if denom == 0.0 {
                break;
            }
            cs[k] = h[k][k] / denom;
            sn[k] = h[k + 1][k] / denom;
            h[k][k] = denom;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            iterations += 1;
            k += 1;
            if g[k].abs() <= 0.5 * settings.tol * bnorm || hn == 0.0 {
                break;
            }
            v.push(w.iter().map(|wj| wj / hn).collect());
        }
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| h[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (yi, zi) in y.iter().zip(&z) {
            for (xj, zj) in x.iter_mut().zip(zi) {
                *xj += yi * zj;
            }
        }
        if k == 0 {
            return Err(Error::NoConvergence {
                residual: rel,
                iterations,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_nonsymmetric_system() {
        let n = 50;
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                let l = if i > 0 { x[i - 1] } else { 0.0 };
                let r = if i + 1 < n { x[i + 1] } else { 0.0 };
                y[i] = 3.0 * x[i] - 1.5 * l - 0.5 * r;
            }
        };
        let b: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let mut x = vec![0.0; n];
        let settings = GmresSettings {
            tol: 1e-12,
            restart: 10,
            max_iter: 500,
        };
        let out = gmres(apply, |r: &[f64], z: &mut [f64]| z.copy_from_slice(r), &b, &mut x, settings)
            .unwrap();
        let mut ax = vec![0.0; n];
        apply(&x, &mut ax);
        let res: f64 = ax.iter().zip(&b).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(res <= 1e-11 * norm(&b));
        assert!(out.relative_residual <= 1e-12);
    }

    #[test]
    fn exact_preconditioner_converges_in_one_step() {
        let n = 8;
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                y[i] = (i + 1) as f64 * x[i];
            }
        };
        let inv = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                y[i] = x[i] / (i + 1) as f64;
            }
        };
        let b = vec![1.0; n];
        let mut x = vec![0.0; n];
        let out = gmres(apply, inv, &b, &mut x, GmresSettings::default()).unwrap();
        assert_eq!(out.iterations, 1);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let mut x = vec![1.0; 3];
        let out = gmres(
            |a: &[f64], y: &mut [f64]| y.copy_from_slice(a),
            |a: &[f64], y: &mut [f64]| y.copy_from_slice(a),
            &[0.0; 3],
            &mut x,
            GmresSettings::default(),
        )
        .unwrap();
        assert_eq!(x, vec![0.0; 3]);
        assert_eq!(out.iterations, 0);
    }
}
