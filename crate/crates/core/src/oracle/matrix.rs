use super::{o_rel_err, DyadicReal};
use crate::error::{invalid, MpfError, Result};
use crate::linalg::MpMatrix;

/// Default dimension guard for [`o_matmul`].
pub const DEFAULT_MATMUL_GUARD: usize = 64;

/// Dense row-major matrix of exact values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicMatrix {
    rows: usize,
    cols: usize,
    data: Vec<DyadicReal>,
}

impl DyadicMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DyadicMatrix {
            rows,
            cols,
            data: vec![DyadicReal::zero(); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> DyadicReal) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DyadicMatrix { rows, cols, data }
    }

    /// Exact values of every element of `m`.
    pub fn from_mp(m: &MpMatrix) -> Result<Self> {
        let mut data = Vec::with_capacity(m.rows() * m.cols());
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                data.push(DyadicReal::from_components(&m.element(i, j))?);
            }
        }
        Ok(DyadicMatrix {
            rows: m.rows(),
            cols: m.cols(),
            data,
        })
    }

    /// Leading `cols` columns of `self`.
    pub fn leading_columns(&self, cols: usize) -> Self {
        let cols = cols.min(self.cols);
        Self::from_fn(self.rows, cols, |i, j| self.get(i, j).clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &DyadicReal {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: DyadicReal) {
        self.data[i * self.cols + j] = v;
    }
}

/// Exact `A * B`. Any dimension above `guard` is refused.
pub fn o_matmul(a: &DyadicMatrix, b: &DyadicMatrix, guard: usize) -> Result<DyadicMatrix> {
    if a.cols != b.rows {
        return Err(MpfError::ShapeMismatch {
            op: "o_matmul",
            left_rows: a.rows,
            left_cols: a.cols,
            right_rows: b.rows,
            right_cols: b.cols,
        });
    }
    let largest = a.rows.max(a.cols).max(b.cols);
    if largest > guard {
        return Err(invalid(format!(
            "oracle matmul dimension {largest} exceeds guard {guard}"
        )));
    }
    let mut c = DyadicMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for j in 0..b.cols {
            let mut acc = DyadicReal::zero();
            for k in 0..a.cols {
                acc = acc.checked_add(&a.get(i, k).checked_mul(b.get(k, j))?)?;
            }
            c.set(i, j, acc);
        }
    }
    Ok(c)
}

/// Largest per-element relative error of `approx` against `exact`.
///
/// When `exact` has fewer columns than `approx`, column `j` of `approx` is
/// compared against column `j % exact.cols()`; this lets callers verify
/// products whose columns are known to repeat without recomputing them.
pub fn max_rel_err(approx: &MpMatrix, exact: &DyadicMatrix) -> Result<f64> {
    if approx.rows() != exact.rows || exact.cols == 0 || !approx.cols().is_multiple_of(exact.cols) {
        return Err(MpfError::ShapeMismatch {
            op: "max_rel_err",
            left_rows: approx.rows(),
            left_cols: approx.cols(),
            right_rows: exact.rows,
            right_cols: exact.cols,
        });
    }
    let mut worst: f64 = 0.0;
    for i in 0..approx.rows() {
        for j in 0..approx.cols() {
            let e = o_rel_err(&approx.element(i, j), exact.get(i, j % exact.cols))?;
            worst = worst.max(e);
        }
    }
    Ok(worst)
}

/// Decimal digits lost relative to the format's capacity:
/// `max(0, log10(max_rel_err / fmt_eps))`.
pub fn digit_loss(approx: &MpMatrix, exact: &DyadicMatrix) -> Result<f64> {
    let worst = max_rel_err(approx, exact)?;
    Ok(digits_lost(worst, approx.precision().fmt_eps()))
}

/// `max(0, log10(rel_err / fmt_eps))`.
pub fn digits_lost(rel_err: f64, fmt_eps: f64) -> f64 {
    if rel_err <= 0.0 {
        return 0.0;
    }
    (rel_err / fmt_eps).log10().max(0.0)
}
