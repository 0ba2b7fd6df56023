//! Bit-exact binary formats for fields and ξ ensembles.
//!
//! Field snapshot: `b"SALTFLD1"`, `u32` dim, `u32` resolution, `f64` time,
//! then `dim * resolution^dim` complex values as `(re, im)` `f64` pairs,
//! component-major, each component in row-major FFT order. All little-endian.
//!
//! Ensemble: `b"SALTXI01"`, `u32` dim, `u32` resolution, `u32` count, then
//! `count` coefficient blocks laid out as above.

use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::{RawField, SpectralField};
use crate::grid::TorusGrid;
use crate::real::Real;

pub const FIELD_MAGIC: &[u8; 8] = b"SALTFLD1";
pub const ENSEMBLE_MAGIC: &[u8; 8] = b"SALTXI01";

fn write_coeffs<T: Real, W: Write>(w: &mut W, f: &RawField<T>) -> Result<()> {
    let mut bytes = Vec::with_capacity(16 * f.coeffs().len());
    for z in f.coeffs() {
        bytes.extend_from_slice(&z.re.to_f64_lossy().to_le_bytes());
        bytes.extend_from_slice(&z.im.to_f64_lossy().to_le_bytes());
    }
    w.write_all(&bytes)?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn read_grid<R: Read>(r: &mut R) -> Result<Arc<TorusGrid>> {
    let dim = read_u32(r)? as usize;
    let res = read_u32(r)? as usize;
    Ok(Arc::new(TorusGrid::new(dim, res)?))
}

fn read_coeffs<T: Real, R: Read>(r: &mut R, grid: &Arc<TorusGrid>) -> Result<RawField<T>> {
    let n = grid.dim() * grid.len();
    let mut bytes = vec![0u8; 16 * n];
    r.read_exact(&mut bytes)?;
    let coeffs = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex::new(T::lit(re), T::lit(im))
        })
        .collect();
    RawField::from_coeffs(grid, coeffs)
}

fn check_magic<R: Read>(r: &mut R, magic: &[u8; 8]) -> Result<()> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    if &b != magic {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&b),
            String::from_utf8_lossy(magic)
        )));
    }
    Ok(())
}

pub fn write_field<T: Real, W: Write>(w: &mut W, f: &RawField<T>, time: f64) -> Result<()> {
    let g = f.grid();
    w.write_all(FIELD_MAGIC)?;
    w.write_all(&(g.dim() as u32).to_le_bytes())?;
    w.write_all(&(g.resolution() as u32).to_le_bytes())?;
    w.write_all(&time.to_le_bytes())?;
    write_coeffs(w, f)
}

/// Reads a snapshot, returning the raw coefficients and the simulation time.
pub fn read_field<T: Real, R: Read>(r: &mut R) -> Result<(RawField<T>, f64)> {
    check_magic(r, FIELD_MAGIC)?;
    let grid = read_grid(r)?;
    let time = read_f64(r)?;
    let f = read_coeffs(r, &grid)?;
    Ok((f, time))
}

pub fn write_ensemble<T: Real, W: Write>(w: &mut W, fields: &[SpectralField<T>], grid: &TorusGrid) -> Result<()> {
    w.write_all(ENSEMBLE_MAGIC)?;
    w.write_all(&(grid.dim() as u32).to_le_bytes())?;
    w.write_all(&(grid.resolution() as u32).to_le_bytes())?;
    w.write_all(&(fields.len() as u32).to_le_bytes())?;
    for f in fields {
        write_coeffs(w, f)?;
    }
    Ok(())
}

pub fn read_ensemble<T: Real, R: Read>(r: &mut R) -> Result<Vec<RawField<T>>> {
    check_magic(r, ENSEMBLE_MAGIC)?;
    let grid = read_grid(r)?;
    let count = read_u32(r)? as usize;
    (0..count).map(|_| read_coeffs(r, &grid)).collect()
}
