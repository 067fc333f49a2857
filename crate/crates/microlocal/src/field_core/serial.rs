use super::field::SampledField;
use super::grid::Grid;
use crate::error::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

/// Metadata sidecar written next to the raw coefficient bytes.
#[derive(Debug, Serialize, Deserialize)]
struct FieldMeta {
    grid: Grid,
    ncomp: usize,
    /// Relative file name holding the coefficients.
    data_file: String,
    /// Encoding tag; only complex128 little-endian interleaved is supported.
    format: String,
}

const FORMAT_TAG: &str = "c128le";

/// Write `<name>.json` (metadata) and `<name>.bin` (Fourier coefficients,
/// complex128 little-endian, components in row-major order) into `dir`.
/// Coefficients are the stored representation, so a save/load roundtrip is
/// bit-exact on the spectral side.
pub fn save_field(field: &SampledField, dir: &Path, name: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    let data_file = format!("{name}.bin");
    let meta = FieldMeta {
        grid: *field.grid(),
        ncomp: field.ncomp(),
        data_file: data_file.clone(),
        format: FORMAT_TAG.to_string(),
    };
    let meta_path = dir.join(format!("{name}.json"));
    fs::write(&meta_path, serde_json::to_vec_pretty(&meta)?)?;

    let mut bytes = Vec::with_capacity(field.ncomp() * field.grid().points() * 16);
    for c in 0..field.ncomp() {
        for h in field.hat_row(c) {
            bytes.extend_from_slice(&h.re.to_le_bytes());
            bytes.extend_from_slice(&h.im.to_le_bytes());
        }
    }
    let mut f = fs::File::create(dir.join(&data_file))?;
    f.write_all(&bytes)?;
    Ok(())
}

/// Load a field previously written by `save_field`.
pub fn load_field(dir: &Path, name: &str) -> Result<SampledField> {
    let meta_path = dir.join(format!("{name}.json"));
    let meta: FieldMeta = serde_json::from_slice(&fs::read(&meta_path)?)?;
    if meta.format != FORMAT_TAG {
        return Err(Error::Unsupported(format!(
            "unknown field encoding {}",
            meta.format
        )));
    }
    let grid = Grid::new(meta.grid.dim, meta.grid.n, meta.grid.len)?;
    let pts = grid.points();
    let mut bytes = Vec::new();
    fs::File::open(dir.join(&meta.data_file))?.read_to_end(&mut bytes)?;
    let expect = meta.ncomp * pts * 16;
    if bytes.len() != expect {
        return Err(Error::Numerical(format!(
            "coefficient file holds {} bytes, expected {expect}",
            bytes.len()
        )));
    }
    let mut hat = Array2::default((meta.ncomp, pts));
    let mut off = 0;
    for c in 0..meta.ncomp {
        for k in 0..pts {
            let re = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
            let im = f64::from_le_bytes(bytes[off + 8..off + 16].try_into().unwrap());
            hat[(c, k)] = Complex64::new(re, im);
            off += 16;
        }
    }
    SampledField::from_coeffs(grid, hat)
}
