//! Binary field checkpoints.
//!
//! Layout (all little-endian):
//!
//! | bytes | content                                   |
//! |-------|-------------------------------------------|
//! | 6     | magic `TFMHD1`                            |
//! | 4     | `n_per_axis` as u32                       |
//! | 4     | field count as u32                        |
//! | ...   | per field, n³ complex values in FFT order, each stored as `re: f64, im: f64` |

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use super::field::SpectralField;
use super::grid::Grid3;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 6] = b"TFMHD1";
const HEADER_LEN: usize = 6 + 4 + 4;

pub fn encode(fields: &[&SpectralField]) -> Result<Vec<u8>> {
    let grid = match fields.first() {
        Some(f) => f.grid(),
        None => return Err(Error::param("checkpoint needs at least one field")),
    };
    for f in fields {
        if f.grid() != grid {
            return Err(Error::GridMismatch {
                left: grid.n(),
                right: f.grid().n(),
            });
        }
    }
    let mut out = Vec::with_capacity(HEADER_LEN + fields.len() * grid.len() * 16);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    out.extend_from_slice(&(fields.len() as u32).to_le_bytes());
    for f in fields {
        for c in f.coeffs() {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<Vec<SpectralField>> {
    if bytes.len() < HEADER_LEN || &bytes[..6] != MAGIC {
        return Err(Error::Format("missing TFMHD1 header".into()));
    }
    let n = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
    let count = u32::from_le_bytes(bytes[10..14].try_into().unwrap()) as usize;
    let grid = Grid3::new(n)?;
    let expected = HEADER_LEN + count * grid.len() * 16;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "checkpoint length {} does not match header ({} expected)",
            bytes.len(),
            expected
        )));
    }
    let mut fields = Vec::with_capacity(count);
    let mut chunks = bytes[HEADER_LEN..].chunks_exact(16);
    for _ in 0..count {
        let coeffs: Vec<Complex64> = (&mut chunks)
            .take(grid.len())
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect();
        fields.push(SpectralField::from_coeffs(grid, coeffs)?);
    }
    Ok(fields)
}

pub fn write_checkpoint(path: impl AsRef<Path>, fields: &[&SpectralField]) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode(fields)?;
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&bytes).map_err(|e| Error::io(path, e))
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<Vec<SpectralField>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}
