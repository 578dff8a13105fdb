//! Dense assembly of the saddle-point system, entry by entry.
//!
//! Used as the `dense-direct` method and as an oracle for the matrix-free
//! operator; it shares no stencil code with it.

use nalgebra::DMatrix;

use crate::field::{DomainSpec, PhysParams};

pub(crate) fn assemble(d: &DomainSpec, p: &PhysParams) -> DMatrix<f64> {
    let (nx, ny, nz) = (d.nx, d.ny, d.nz);
    let (dx, dy, dz) = (d.dx(), d.dy(), d.dz());
    let wz = d.weights_z();
    let n3 = (nx + 1) * (ny + 1) * (nz + 1);
    let n2 = (nx + 1) * (ny + 1);
    let u1 = |i: usize, j: usize, k: usize| (i * (ny + 1) + j) * (nz + 1) + k;
    let u2 = |i: usize, j: usize, k: usize| n3 + u1(i, j, k);
    let ps = |i: usize, j: usize| 2 * n3 + i * (ny + 1) + j;
    let mut a = DMatrix::<f64>::zeros(2 * n3 + n2, 2 * n3 + n2);

    // Second-difference row `-f''` at `i` of an `n`-interval lane; Neumann
    // ends mirror the ghost, Dirichlet ends drop neighbors on the wall.
    let lap = |i: usize, n: usize, h: f64, neumann: bool| -> Vec<(usize, f64)> {
        let c = 1.0 / (h * h);
        let mut out = vec![(i, 2.0 * c)];
        if neumann && i == 0 {
            out.push((1, -2.0 * c));
        } else if neumann && i == n {
            out.push((n - 1, -2.0 * c));
        } else {
            for nb in [i - 1, i + 1] {
                if neumann || (nb > 0 && nb < n) {
                    out.push((nb, -c));
                }
            }
        }
        out
    };

    for i in 0..=nx {
        for j in 0..=ny {
            let f = p.coriolis(d.y(j));
            for k in 0..=nz {
                let row = u1(i, j, k);
                if i == 0 || i == nx {
                    a[(row, row)] = 1.0;
                } else {
                    for (ii, c) in lap(i, nx, dx, false) {
                        a[(row, u1(ii, j, k))] += p.a_h * c;
                    }
                    for (jj, c) in lap(j, ny, dy, true) {
                        a[(row, u1(i, jj, k))] += p.a_h * c;
                    }
                    for (kk, c) in lap(k, nz, dz, true) {
                        a[(row, u1(i, j, kk))] += p.a_v * c;
                    }
                    if j > 0 && j < ny {
                        a[(row, u2(i, j, k))] -= f;
                    }
                    a[(row, ps(i + 1, j))] += 0.5 / dx;
                    a[(row, ps(i - 1, j))] -= 0.5 / dx;
                }
                let row = u2(i, j, k);
                if j == 0 || j == ny {
                    a[(row, row)] = 1.0;
                } else {
                    for (ii, c) in lap(i, nx, dx, true) {
                        a[(row, u2(ii, j, k))] += p.a_h * c;
                    }
                    for (jj, c) in lap(j, ny, dy, false) {
                        a[(row, u2(i, jj, k))] += p.a_h * c;
                    }
                    for (kk, c) in lap(k, nz, dz, true) {
                        a[(row, u2(i, j, kk))] += p.a_v * c;
                    }
                    if i > 0 && i < nx {
                        a[(row, u1(i, j, k))] += f;
                    }
                    a[(row, ps(i, j + 1))] += 0.5 / dy;
                    a[(row, ps(i, j - 1))] -= 0.5 / dy;
                }
            }
            let row = ps(i, j);
            if i < 2 && j < 2 {
                a[(row, row)] = 1.0;
                continue;
            }
            // Divergence of the depth-summed transport; wall values of the
            // normal component are zero and are not referenced.
            for (k, &w) in wz.iter().enumerate() {
                match i {
                    0 => a[(row, u1(1, j, k))] += w / dx,
                    _ if i == nx => a[(row, u1(nx - 1, j, k))] -= w / dx,
                    _ => {
                        if i + 1 < nx {
                            a[(row, u1(i + 1, j, k))] += 0.5 * w / dx;
                        }
                        if i > 1 {
                            a[(row, u1(i - 1, j, k))] -= 0.5 * w / dx;
                        }
                    }
                }
                match j {
                    0 => a[(row, u2(i, 1, k))] += w / dy,
                    _ if j == ny => a[(row, u2(i, ny - 1, k))] -= w / dy,
                    _ => {
                        if j + 1 < ny {
                            a[(row, u2(i, j + 1, k))] += 0.5 * w / dy;
                        }
                        if j > 1 {
                            a[(row, u2(i, j - 1, k))] -= 0.5 * w / dy;
                        }
                    }
                }
            }
        }
    }
    a
}
