//! Raw field snapshots: little-endian `f64` values in z-fastest order plus a
//! JSON sidecar header.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array3;
use serde::{Deserialize, Serialize};

use super::{DomainSpec, ScalarField3D};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub lx: f64,
    pub ly: f64,
    pub h: f64,
    pub name: String,
    pub time: f64,
}

/// Writes `<stem>.bin` and `<stem>.json` into `dir`; returns the `.bin` path.
pub fn write_snapshot(
    dir: &Path,
    stem: &str,
    name: &str,
    time: f64,
    field: &ScalarField3D,
) -> Result<PathBuf> {
    let d = field.domain;
    let header = SnapshotHeader {
        nx: d.nx,
        ny: d.ny,
        nz: d.nz,
        lx: d.lx,
        ly: d.ly,
        h: d.h,
        name: name.to_string(),
        time,
    };
    let mut bytes = Vec::with_capacity(field.values.len() * 8);
    // Standard layout of Array3 is z-fastest.
    for v in field.values.iter() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    let bin = dir.join(format!("{stem}.bin"));
    fs::write(&bin, bytes)?;
    fs::write(
        dir.join(format!("{stem}.json")),
        serde_json::to_string_pretty(&header)? + "\n",
    )?;
    Ok(bin)
}

pub fn read_snapshot(bin: &Path) -> Result<(SnapshotHeader, ScalarField3D)> {
    let header: SnapshotHeader =
        serde_json::from_str(&fs::read_to_string(bin.with_extension("json"))?)?;
    let bytes = fs::read(bin)?;
    let d = DomainSpec::new(header.lx, header.ly, header.h, header.nx, header.ny, header.nz);
    let (a, b, c) = d.shape3();
    if bytes.len() != a * b * c * 8 {
        return Err(Error::ShapeMismatch {
            expected: vec![a * b * c * 8],
            found: vec![bytes.len()],
        });
    }
    let data: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let values = Array3::from_shape_vec((a, b, c), data).expect("length checked");
    Ok((header, ScalarField3D::from_array(d, values)?))
}
