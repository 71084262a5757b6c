//! Field persistence: raw little-endian binary payload plus a JSON sidecar.
//!
//! Payload layout: 64-bit floats, row-major, interleaved (re, im), length
//! 2 n^2. The sidecar records {n, box_length, kind, norm, endianness} and is
//! written next to the payload as `<path>.json`. Round trips are bit-exact.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ComplexField, Grid};

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    n: usize,
    box_length: f64,
    kind: String,
    norm: f64,
    endianness: String,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".json");
    PathBuf::from(os)
}

/// Write a field as binary payload + JSON sidecar.
pub fn dump_field(f: &ComplexField, path: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(f.values.len() * 16);
    for v in &f.values {
        bytes.extend_from_slice(&v.re.to_le_bytes());
        bytes.extend_from_slice(&v.im.to_le_bytes());
    }
    let mut file = fs::File::create(path)?;
    file.write_all(&bytes)?;
    let sidecar = Sidecar {
        n: f.grid.n(),
        box_length: f.grid.box_length(),
        kind: "complex".into(),
        norm: f.norm_sq().sqrt(),
        endianness: "little".into(),
    };
    fs::write(sidecar_path(path), serde_json::to_vec_pretty(&sidecar)?)?;
    Ok(())
}

/// Read a field written by [`dump_field`]; bit-exact inverse.
pub fn load_field(path: &Path) -> Result<ComplexField> {
    let sidecar: Sidecar = serde_json::from_slice(&fs::read(sidecar_path(path))?)?;
    if sidecar.endianness != "little" {
        return Err(Error::FieldFile(format!(
            "endianness tag mismatch: expected \"little\", got \"{}\"",
            sidecar.endianness
        )));
    }
    if sidecar.kind != "complex" {
        return Err(Error::FieldFile(format!("unsupported field kind \"{}\"", sidecar.kind)));
    }
    let payload = fs::read(path)?;
    let expected = sidecar.n * sidecar.n * 16;
    if payload.len() != expected {
        return Err(Error::FieldFile(format!(
            "payload length {} does not match sidecar n = {} (expected {expected} bytes)",
            payload.len(),
            sidecar.n
        )));
    }
    let grid = Grid::new(sidecar.n, sidecar.box_length)?;
    let values: Vec<Complex64> = payload
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[0..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..16].try_into().unwrap()),
            )
        })
        .collect();
    ComplexField::from_values(&grid, values)
}
