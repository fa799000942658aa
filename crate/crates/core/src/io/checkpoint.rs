//! Binary checkpoints.
//!
//! Little-endian layout: the magic bytes `MHDT`, a format version (`u32`), `n`
//! (`u32`), the physical time (`f64`), then for each of `a, u1, u2, u3, h1, h2, h3`
//! the complex coefficients of the retained lattice as interleaved `(re, im)` pairs.
//! Wave vectors run over `-K..=K` on every axis with the last axis fastest.

use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::Grid3;
use crate::state::PerturbationState;

pub const MAGIC: [u8; 4] = *b"MHDT";
pub const VERSION: u32 = 1;
const HEADER: usize = 4 + 4 + 4 + 8;
const FIELDS: usize = 7;

/// Storage indices of the retained lattice in checkpoint order.
fn lattice(grid: Grid3) -> impl Iterator<Item = usize> {
    let k = grid.cutoff();
    (-k..=k).flat_map(move |k0| {
        (-k..=k).flat_map(move |k1| (-k..=k).map(move |k2| grid.index_of([k0, k1, k2]).expect("retained mode")))
    })
}

pub fn encode_checkpoint(state: &PerturbationState) -> Vec<u8> {
    let grid = state.grid();
    let side = 2 * grid.cutoff() as usize + 1;
    let mut out = Vec::with_capacity(HEADER + FIELDS * side.pow(3) * 16);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    out.extend_from_slice(&state.time.to_le_bytes());
    for field in state.fields() {
        let coeffs = field.coeffs();
        for idx in lattice(grid) {
            out.extend_from_slice(&coeffs[idx].re.to_le_bytes());
            out.extend_from_slice(&coeffs[idx].im.to_le_bytes());
        }
    }
    out
}

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("four bytes"))
}

fn read_f64(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().expect("eight bytes"))
}

/// Decodes a checkpoint; modes outside the retained band are zero.
pub fn decode_checkpoint(bytes: &[u8]) -> Result<PerturbationState> {
    if bytes.len() < HEADER {
        return Err(Error::Checkpoint(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if bytes[..4] != MAGIC {
        return Err(Error::Checkpoint("bad magic, expected MHDT".into()));
    }
    let version = read_u32(bytes, 4);
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let grid = Grid3::new(read_u32(bytes, 8) as usize).map_err(|e| Error::Checkpoint(e.to_string()))?;
    let time = read_f64(bytes, 12);
    let side = 2 * grid.cutoff() as usize + 1;
    let expected = HEADER + FIELDS * side.pow(3) * 16;
    if bytes.len() != expected {
        return Err(Error::Checkpoint(format!(
            "expected {expected} bytes for n = {}, got {}",
            grid.n(),
            bytes.len()
        )));
    }
    let mut state = PerturbationState::zeros(grid);
    state.time = time;
    let mut at = HEADER;
    for field in state.fields_mut() {
        let coeffs = field.coeffs_mut();
        for idx in lattice(grid) {
            coeffs[idx] = Complex64::new(read_f64(bytes, at), read_f64(bytes, at + 8));
            at += 16;
        }
    }
    if !state.is_finite() {
        return Err(Error::Checkpoint("non-finite coefficient".into()));
    }
    let defect = state.fields().iter().map(|f| f.hermitian_defect()).fold(0.0, f64::max);
    let scale = state.l2_norm_sq().sqrt();
    if defect > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Checkpoint(format!("coefficients are not Hermitian (defect {defect:e})")));
    }
    Ok(state)
}

pub fn write_checkpoint(path: &Path, state: &PerturbationState) -> Result<()> {
    std::fs::write(path, encode_checkpoint(state)).map_err(|e| Error::io(path, e))
}

pub fn read_checkpoint(path: &Path) -> Result<PerturbationState> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes)
}
