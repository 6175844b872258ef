//! Matrix files: exact little-endian binary and lossy decimal CSV.
//!
//! Binary layout: `"MPFM"`, version `u32`, width `u8` (2, 3 or 4), rows,
//! cols and stride as `u64`, then each plane's `rows * stride` cells as
//! binary64, all little-endian.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{padded_stride, with_format, MpMatrix};
use crate::error::{MpfError, Result};
use crate::mpf::Precision;

pub const BINARY_MAGIC: &[u8; 4] = b"MPFM";
pub const BINARY_VERSION: u32 = 1;

fn io_err(path: &Path, source: std::io::Error) -> MpfError {
    MpfError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn format_err(msg: impl Into<String>) -> MpfError {
    MpfError::Format(msg.into())
}

pub fn write_binary(m: &MpMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let mut put = |bytes: &[u8]| w.write_all(bytes).map_err(|e| io_err(path, e));
    put(BINARY_MAGIC)?;
    put(&BINARY_VERSION.to_le_bytes())?;
    put(&[m.width() as u8])?;
    put(&(m.rows() as u64).to_le_bytes())?;
    put(&(m.cols() as u64).to_le_bytes())?;
    put(&(m.stride() as u64).to_le_bytes())?;
    for k in 0..m.width() {
        for x in m.plane(k) {
            put(&x.to_le_bytes())?;
        }
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_binary(path: impl AsRef<Path>) -> Result<MpMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut r = BufReader::new(file);
    let mut take = |n: usize| -> Result<Vec<u8>> {
        let mut buf = vec![0u8; n];
        r.read_exact(&mut buf).map_err(|e| io_err(path, e))?;
        Ok(buf)
    };
    if take(4)? != BINARY_MAGIC {
        return Err(format_err("bad magic"));
    }
    let version = u32::from_le_bytes(take(4)?.try_into().expect("4 bytes"));
    if version != BINARY_VERSION {
        return Err(format_err(format!("unsupported version {version}")));
    }
    let width = take(1)?[0] as usize;
    let precision = Precision::from_width(width)
        .ok_or_else(|| format_err(format!("unsupported width {width}")))?;
    let mut dim = || -> Result<usize> {
        let v = u64::from_le_bytes(take(8)?.try_into().expect("8 bytes"));
        usize::try_from(v).map_err(|_| format_err("dimension too large"))
    };
    let (rows, cols, stride) = (dim()?, dim()?, dim()?);
    if stride != padded_stride(cols) {
        return Err(format_err(format!("stride {stride} does not match {cols} columns")));
    }
    rows.checked_mul(stride)
        .and_then(|n| n.checked_mul(8 * width))
        .ok_or_else(|| format_err("matrix too large"))?;
    let mut m = MpMatrix::zeros(precision, rows, cols);
    let cells = rows * stride;
    for k in 0..width {
        let bytes = take(cells * 8)?;
        let plane = m.plane_mut(k);
        for (x, b) in plane.iter_mut().zip(bytes.chunks_exact(8)) {
            *x = f64::from_le_bytes(b.try_into().expect("8 bytes"));
        }
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra).map_err(|e| io_err(path, e))? != 0 {
        return Err(format_err("trailing bytes after last plane"));
    }
    if !m.padding_is_zero() {
        return Err(format_err("nonzero padding cell"));
    }
    Ok(m)
}

/// One line per row, each element printed with `digits` significant digits.
pub fn write_csv(m: &MpMatrix, path: impl AsRef<Path>, digits: usize) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    with_format!(m.precision(), F => {
        for i in 0..m.rows() {
            let row: Vec<String> = (0..m.cols())
                .map(|j| m.get::<F>(i, j).to_decimal_string(digits))
                .collect();
            w.write_record(&row).map_err(|e| csv_err(path, e))?;
        }
    });
    w.flush().map_err(|e| io_err(path, e))
}

/// Reads a CSV of decimal strings, rounding each to `precision`.
pub fn read_csv(path: impl AsRef<Path>, precision: Precision) -> Result<MpMatrix> {
    let path = path.as_ref();
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let mut rows: Vec<Vec<[f64; 4]>> = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let row = with_format!(precision, F => {
            rec.iter()
                .map(|s| F::from_decimal_string(s).map(crate::mpf::MpFormat::to_padded))
                .collect::<Result<Vec<_>>>()?
        });
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(format_err(format!(
                    "row {} has {} fields, expected {}",
                    rows.len() + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    let cols = rows.first().map_or(0, Vec::len);
    MpMatrix::from_fn(precision, rows.len(), cols, |i, j| rows[i][j].to_vec())
}

fn csv_err(path: &Path, e: csv::Error) -> MpfError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io_err(path, io),
        other => format_err(format!("{}: {other:?}", path.display())),
    }
}
