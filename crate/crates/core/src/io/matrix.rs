//! Matrix persistence in two formats.
//!
//! - CSV: one row per line, comma separators, 17 significant digits — enough
//!   for exact f64 round-trips while staying human-readable.
//! - GMX1 binary: magic `GMX1`, little-endian u64 row and column counts,
//!   then row-major 64-bit floats. Bit-exact by construction.
//!
//! Loads reject malformed headers, truncated payloads, trailing bytes and
//! non-finite values.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const GMX_MAGIC: &[u8; 4] = b"GMX1";

pub fn save_matrix_gmx(path: &Path, matrix: &DMatrix<f64>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(GMX_MAGIC)?;
    out.write_all(&(matrix.nrows() as u64).to_le_bytes())?;
    out.write_all(&(matrix.ncols() as u64).to_le_bytes())?;
    for i in 0..matrix.nrows() {
        for j in 0..matrix.ncols() {
            out.write_all(&matrix[(i, j)].to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn load_matrix_gmx(path: &Path) -> Result<DMatrix<f64>> {
    let mut file = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    file.read_exact(&mut magic)
        .map_err(|_| Error::data(format!("{}: missing GMX1 header", path.display())))?;
    if &magic != GMX_MAGIC {
        return Err(Error::data(format!(
            "{}: bad magic {:?}, expected GMX1",
            path.display(),
            magic
        )));
    }
    let mut dims = [0u8; 16];
    file.read_exact(&mut dims)
        .map_err(|_| Error::data(format!("{}: truncated header", path.display())))?;
    let rows = u64::from_le_bytes(dims[0..8].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(dims[8..16].try_into().unwrap()) as usize;
    let count = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::data(format!("{}: dimension overflow", path.display())))?;

    let mut payload = vec![0u8; count * 8];
    file.read_exact(&mut payload)
        .map_err(|_| Error::data(format!("{}: truncated payload", path.display())))?;
    let mut trailing = [0u8; 1];
    if file.read(&mut trailing)? != 0 {
        return Err(Error::data(format!(
            "{}: trailing bytes after payload",
            path.display()
        )));
    }

    let mut matrix = DMatrix::<f64>::zeros(rows, cols);
    for idx in 0..count {
        let bytes: [u8; 8] = payload[idx * 8..idx * 8 + 8].try_into().unwrap();
        let v = f64::from_le_bytes(bytes);
        if !v.is_finite() {
            return Err(Error::data(format!(
                "{}: non-finite value at element {idx}",
                path.display()
            )));
        }
        matrix[(idx / cols.max(1), idx % cols.max(1))] = v;
    }
    Ok(matrix)
}

pub fn save_matrix_csv(path: &Path, matrix: &DMatrix<f64>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for i in 0..matrix.nrows() {
        let row: Vec<String> = (0..matrix.ncols())
            .map(|j| format!("{:.16e}", matrix[(i, j)]))
            .collect();
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}

pub fn load_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let file = BufReader::new(File::open(path)?);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in file.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for field in line.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::data(format!(
                    "{}:{}: cannot parse '{field}' as a number",
                    path.display(),
                    lineno + 1
                ))
            })?;
            if !v.is_finite() {
                return Err(Error::data(format!(
                    "{}:{}: non-finite value",
                    path.display(),
                    lineno + 1
                )));
            }
            row.push(v);
        }
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::data(format!(
                    "{}:{}: ragged row ({} fields, expected {})",
                    path.display(),
                    lineno + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Ok(DMatrix::zeros(0, 0));
    }
    let cols = rows[0].len();
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

/// Extension-dispatched save: `.csv` is text, anything else is GMX1.
pub fn save_matrix(path: &Path, matrix: &DMatrix<f64>) -> Result<()> {
    if path.extension().is_some_and(|e| e == "csv") {
        save_matrix_csv(path, matrix)
    } else {
        save_matrix_gmx(path, matrix)
    }
}

pub fn load_matrix(path: &Path) -> Result<DMatrix<f64>> {
    if path.extension().is_some_and(|e| e == "csv") {
        load_matrix_csv(path)
    } else {
        load_matrix_gmx(path)
    }
}
