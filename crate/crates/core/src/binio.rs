//! Binary matrices: a little-endian `u64` row count and `u64` column count
//! followed by the entries as row-major little-endian `f64`.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Writes a row-major matrix.
pub(crate) fn write_matrix(path: &Path, rows: usize, cols: usize, data: impl Iterator<Item = f64>) -> Result<()> {
    let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    let mut put = |bytes: &[u8]| w.write_all(bytes).map_err(|e| Error::io(path, e));
    put(&(rows as u64).to_le_bytes())?;
    put(&(cols as u64).to_le_bytes())?;
    let mut n = 0;
    for v in data {
        put(&v.to_le_bytes())?;
        n += 1;
    }
    debug_assert_eq!(n, rows * cols);
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a row-major matrix as `(rows, cols, data)`.
pub(crate) fn read_matrix(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(f);
    let mut word = [0u8; 8];
    let mut next = |r: &mut BufReader<fs::File>| -> Result<[u8; 8]> {
        r.read_exact(&mut word).map_err(|e| Error::io(path, e))?;
        Ok(word)
    };
    let rows = u64::from_le_bytes(next(&mut r)?) as usize;
    let cols = u64::from_le_bytes(next(&mut r)?) as usize;
    let len = rows
        .checked_mul(cols)
        .filter(|&n| n <= 1 << 32)
        .ok_or_else(|| Error::Parse(format!("{}: implausible size {rows}x{cols}", path.display())))?;
    let mut data = Vec::with_capacity(len);
    for _ in 0..len {
        data.push(f64::from_le_bytes(next(&mut r)?));
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest).map_err(|e| Error::io(path, e))?;
    if !rest.is_empty() {
        return Err(Error::Parse(format!(
            "{}: {} trailing bytes",
            path.display(),
            rest.len()
        )));
    }
    Ok((rows, cols, data))
}
