use crate::field::{DomainSpec, ScalarField3D};

/// Assignment of nodes to `⌈L/h⌉` boxes per axis. A node at `s` belongs to
/// box `⌊s/h⌋` (clamped to the last box), so boxes are half-open and the
/// last one absorbs the far wall.
#[derive(Debug, Clone)]
pub struct VolumeBoxes {
    pub counts: [usize; 3],
    ix: Vec<usize>,
    iy: Vec<usize>,
    iz: Vec<usize>,
}

fn assign(n: usize, d: f64, len: f64, h: f64) -> (usize, Vec<usize>) {
    let count = ((len / h) - 1e-9).ceil().max(1.0) as usize;
    let idx = (0..=n)
        .map(|i| {
            let s = i as f64 * d / h;
            ((s + 1e-9).floor() as usize).min(count - 1)
        })
        .collect();
    (count, idx)
}

impl VolumeBoxes {
    pub fn new(d: &DomainSpec, h: f64) -> Self {
        let (cx, ix) = assign(d.nx, d.dx(), d.lx, h);
        let (cy, iy) = assign(d.ny, d.dy(), d.ly, h);
        let (cz, iz) = assign(d.nz, d.dz(), d.h, h);
        Self {
            counts: [cx, cy, cz],
            ix,
            iy,
            iz,
        }
    }

    fn flat(&self, i: usize, j: usize, k: usize) -> usize {
        (self.ix[i] * self.counts[1] + self.iy[j]) * self.counts[2] + self.iz[k]
    }

    /// Replaces every node value by the weighted mean over its box.
    pub fn average(&self, f: &ScalarField3D) -> ScalarField3D {
        let d = f.domain;
        let (wx, wy, wz) = (d.weights_x(), d.weights_y(), d.weights_z());
        let nboxes = self.counts.iter().product();
        let mut sums = vec![0.0; nboxes];
        let mut vols = vec![0.0; nboxes];
        for ((i, j, k), v) in f.values.indexed_iter() {
            let w = wx[i] * wy[j] * wz[k];
            let b = self.flat(i, j, k);
            sums[b] += w * v;
            vols[b] += w;
        }
        let mut out = f.clone();
        for ((i, j, k), v) in out.values.indexed_iter_mut() {
            let b = self.flat(i, j, k);
            *v = sums[b] / vols[b];
        }
        out
    }
}
