//! Component-planar matrices and multiplication kernels.
//!
//! An [`MpMatrix`] stores one contiguous, 32-byte aligned plane per
//! component. Rows are padded to a multiple of four so every row starts on a
//! pack boundary; padding cells are always zero.

mod generate;
mod io;
mod kernel;
mod matmul;

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, MpfError, Result};
use crate::mpf::{MpFormat, Precision};
use crate::random::MpRng;
use crate::simd::{quads_as_f64, quads_as_f64_mut, LaneQuad, LANES};

pub use generate::gen_paper_matrices;
pub use io::{read_binary, read_csv, write_binary, write_csv, BINARY_MAGIC, BINARY_VERSION};
pub use matmul::{
    matmul, matmul_block, matmul_block_parallel, matmul_naive, matmul_strassen,
    matmul_strassen_parallel, matmul_strassen_stats, Algorithm, StrassenStats, DEFAULT_CUTOFF,
    DEFAULT_N_MIN,
};

/// Runs `$body` with `$F` bound to the scalar type of `$prec`.
macro_rules! with_format {
    ($prec:expr, $F:ident => $body:expr) => {
        match $prec {
            $crate::mpf::Precision::DD => {
                type $F = $crate::mpf::Double2;
                $body
            }
            $crate::mpf::Precision::TD => {
                type $F = $crate::mpf::Double3;
                $body
            }
            $crate::mpf::Precision::QD => {
                type $F = $crate::mpf::Double4;
                $body
            }
        }
    };
}
pub(crate) use with_format;

/// How kernels move data between memory and registers.
///
/// All variants compute the same operations in the same order; results are
/// bit-identical.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelVariant {
    /// One element at a time.
    Normal,
    /// Four elements per pack, gathered and scattered lane by lane.
    SimdSet,
    /// Four elements per pack with aligned loads and stores.
    SimdLoadStore,
}

impl KernelVariant {
    pub const ALL: [KernelVariant; 3] = [
        KernelVariant::Normal,
        KernelVariant::SimdSet,
        KernelVariant::SimdLoadStore,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelVariant::Normal => "normal",
            KernelVariant::SimdSet => "set",
            KernelVariant::SimdLoadStore => "loadstore",
        }
    }
}

impl fmt::Display for KernelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelVariant {
    type Err = MpfError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "normal" => Ok(KernelVariant::Normal),
            "set" | "simd_set" | "simdset" => Ok(KernelVariant::SimdSet),
            "loadstore" | "simd_loadstore" | "simdloadstore" | "ls" => {
                Ok(KernelVariant::SimdLoadStore)
            }
            _ => Err(MpfError::Parse {
                input: s.to_string(),
                reason: "expected normal, set or loadstore".into(),
            }),
        }
    }
}

/// Dense matrix of DD, TD or QD values in component-planar layout.
#[derive(Clone, PartialEq)]
pub struct MpMatrix {
    precision: Precision,
    rows: usize,
    cols: usize,
    stride: usize,
    planes: Vec<Vec<LaneQuad>>,
}

pub(crate) fn padded_stride(cols: usize) -> usize {
    cols.div_ceil(LANES) * LANES
}

impl MpMatrix {
    pub fn zeros(precision: Precision, rows: usize, cols: usize) -> Self {
        let stride = padded_stride(cols);
        let quads = rows * stride / LANES;
        MpMatrix {
            precision,
            rows,
            cols,
            stride,
            planes: vec![vec![LaneQuad::ZERO; quads]; precision.width()],
        }
    }

    pub fn identity(precision: Precision, n: usize) -> Self {
        let mut m = Self::zeros(precision, n, n);
        let stride = m.stride;
        for i in 0..n {
            m.plane_mut(0)[i * stride + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from per-element components. Extra components past the
    /// format width must be zero; missing ones are taken as zero.
    pub fn from_fn(
        precision: Precision,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Vec<f64>,
    ) -> Result<Self> {
        let mut m = Self::zeros(precision, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set_element(i, j, &f(i, j))?;
            }
        }
        Ok(m)
    }

    pub fn from_values<F: MpFormat>(rows: usize, cols: usize, values: &[F]) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(invalid(format!(
                "{} values given for a {rows}x{cols} matrix",
                values.len()
            )));
        }
        let mut m = Self::zeros(F::PRECISION, rows, cols);
        for (idx, v) in values.iter().enumerate() {
            m.put(idx / cols.max(1), idx % cols.max(1), *v);
        }
        Ok(m)
    }

    /// Random positive entries with leads in `[1, 2)`.
    pub fn random(precision: Precision, rows: usize, cols: usize, rng: &mut MpRng) -> Self {
        with_format!(precision, F => {
            let v: Vec<F> = (0..rows * cols).map(|_| rng.value::<F>()).collect();
            Self::from_values(rows, cols, &v).expect("length matches")
        })
    }

    /// Random entries with leads in `[1, 2)` in magnitude and random signs.
    pub fn random_signed(precision: Precision, rows: usize, cols: usize, rng: &mut MpRng) -> Self {
        with_format!(precision, F => {
            let v: Vec<F> = (0..rows * cols).map(|_| rng.signed_value::<F>()).collect();
            Self::from_values(rows, cols, &v).expect("length matches")
        })
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row pitch of every plane, in binary64 cells.
    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn width(&self) -> usize {
        self.precision.width()
    }

    /// Component plane `k`: `rows * stride` cells, row-major.
    pub fn plane(&self, k: usize) -> &[f64] {
        quads_as_f64(&self.planes[k])
    }

    pub(crate) fn plane_mut(&mut self, k: usize) -> &mut [f64] {
        quads_as_f64_mut(&mut self.planes[k])
    }

    pub(crate) fn planes_mut(&mut self) -> Vec<&mut [f64]> {
        self.planes.iter_mut().map(|p| quads_as_f64_mut(p)).collect()
    }

    pub(crate) fn planes_ref(&self) -> Vec<&[f64]> {
        self.planes.iter().map(|p| quads_as_f64(p)).collect()
    }

    /// Components of element `(i, j)`, zero-padded to four entries.
    pub fn element(&self, i: usize, j: usize) -> [f64; 4] {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of range");
        let off = i * self.stride + j;
        let mut c = [0.0; 4];
        for (k, slot) in c.iter_mut().enumerate().take(self.width()) {
            *slot = self.plane(k)[off];
        }
        c
    }

    pub fn set_element(&mut self, i: usize, j: usize, c: &[f64]) -> Result<()> {
        if i >= self.rows || j >= self.cols {
            return Err(invalid(format!(
                "index ({i}, {j}) out of range for {}x{}",
                self.rows, self.cols
            )));
        }
        let w = self.width();
        if c.iter().skip(w).any(|&x| x != 0.0) {
            return Err(invalid(format!(
                "{} components given for a width-{w} format",
                c.len()
            )));
        }
        if c.iter().any(|x| !x.is_finite()) {
            return Err(invalid("matrix elements must be finite"));
        }
        let off = i * self.stride + j;
        for k in 0..w {
            self.plane_mut(k)[off] = c.get(k).copied().unwrap_or(0.0);
        }
        Ok(())
    }

    /// Element `(i, j)` as a scalar value.
    ///
    /// # Panics
    /// If `F` does not match the matrix precision or the index is out of range.
    pub fn get<F: MpFormat>(&self, i: usize, j: usize) -> F {
        assert_eq!(F::PRECISION, self.precision, "format mismatch");
        F::from_padded(self.element(i, j))
    }

    /// # Panics
    /// As [`MpMatrix::get`].
    pub fn put<F: MpFormat>(&mut self, i: usize, j: usize, v: F) {
        assert_eq!(F::PRECISION, self.precision, "format mismatch");
        self.set_element(i, j, &v.to_padded()).expect("valid element");
    }

    /// Bitwise equality of shape, precision and every cell.
    pub fn bits_eq(&self, other: &MpMatrix) -> bool {
        self.precision == other.precision
            && self.rows == other.rows
            && self.cols == other.cols
            && (0..self.width()).all(|k| {
                self.plane(k)
                    .iter()
                    .zip(other.plane(k))
                    .all(|(a, b)| a.to_bits() == b.to_bits())
            })
    }

    /// True when every padding cell of every plane is `+0.0`.
    pub fn padding_is_zero(&self) -> bool {
        (0..self.width()).all(|k| {
            let p = self.plane(k);
            (0..self.rows).all(|i| {
                p[i * self.stride + self.cols..(i + 1) * self.stride]
                    .iter()
                    .all(|x| x.to_bits() == 0)
            })
        })
    }

    pub(crate) fn clear_padding(&mut self) {
        if self.cols == self.stride {
            return;
        }
        let (rows, cols, stride) = (self.rows, self.cols, self.stride);
        for p in self.planes_mut() {
            for i in 0..rows {
                p[i * stride + cols..(i + 1) * stride].fill(0.0);
            }
        }
    }

    /// `rows x cols` window starting at `(r0, c0)`; cells outside `self`
    /// read as zero.
    pub(crate) fn sub_padded(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> MpMatrix {
        let mut out = MpMatrix::zeros(self.precision, rows, cols);
        let copy_rows = rows.min(self.rows.saturating_sub(r0));
        let copy_cols = cols.min(self.cols.saturating_sub(c0));
        let (src_stride, dst_stride) = (self.stride, out.stride);
        for (k, dst) in out.planes_mut().into_iter().enumerate() {
            let src = self.plane(k);
            for i in 0..copy_rows {
                let s = (r0 + i) * src_stride + c0;
                dst[i * dst_stride..i * dst_stride + copy_cols]
                    .copy_from_slice(&src[s..s + copy_cols]);
            }
        }
        out
    }

    /// Copies the leading part of `src` that fits into `self` at `(r0, c0)`.
    pub(crate) fn paste(&mut self, r0: usize, c0: usize, src: &MpMatrix) {
        let copy_rows = src.rows.min(self.rows.saturating_sub(r0));
        let copy_cols = src.cols.min(self.cols.saturating_sub(c0));
        let (src_stride, dst_stride) = (src.stride, self.stride);
        for (k, dst) in self.planes_mut().into_iter().enumerate() {
            let s = src.plane(k);
            for i in 0..copy_rows {
                let d = (r0 + i) * dst_stride + c0;
                dst[d..d + copy_cols].copy_from_slice(&s[i * src_stride..i * src_stride + copy_cols]);
            }
        }
    }

    pub(crate) fn check_same_shape(&self, other: &MpMatrix, op: &'static str) -> Result<()> {
        self.check_precision(other, op)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(self.shape_error(other, op));
        }
        Ok(())
    }

    pub(crate) fn check_precision(&self, other: &MpMatrix, op: &'static str) -> Result<()> {
        if self.precision != other.precision {
            return Err(MpfError::PrecisionMismatch {
                op,
                left: self.precision,
                right: other.precision,
            });
        }
        Ok(())
    }

    pub(crate) fn shape_error(&self, other: &MpMatrix, op: &'static str) -> MpfError {
        MpfError::ShapeMismatch {
            op,
            left_rows: self.rows,
            left_cols: self.cols,
            right_rows: other.rows,
            right_cols: other.cols,
        }
    }
}

impl fmt::Debug for MpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MpMatrix<{}>({}x{}) [", self.precision, self.rows, self.cols)?;
        for i in 0..self.rows.min(4) {
            write!(f, "\n  ")?;
            for j in 0..self.cols.min(4) {
                write!(f, "{:?} ", &self.element(i, j)[..self.width()])?;
            }
        }
        write!(f, "\n]")
    }
}

/// Element-wise binary operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EwOp {
    /// Default addition of the format.
    Add,
    Sub,
    /// Default multiplication of the format.
    Mul,
    /// Triple-double merge-based addition (TD only).
    TdAddMerge,
    /// Triple-double multiplication through the quad-double product (TD only).
    TdMulQ,
}

impl EwOp {
    pub fn name(self) -> &'static str {
        match self {
            EwOp::Add => "add",
            EwOp::Sub => "sub",
            EwOp::Mul => "mul",
            EwOp::TdAddMerge => "add_merge",
            EwOp::TdMulQ => "mul_q",
        }
    }
}

fn check_ew(op: EwOp, a: &MpMatrix, b: &MpMatrix) -> Result<()> {
    a.check_same_shape(b, op.name())?;
    if matches!(op, EwOp::TdAddMerge | EwOp::TdMulQ) && a.precision != Precision::TD {
        return Err(invalid(format!(
            "{} is only defined for td, got {}",
            op.name(),
            a.precision
        )));
    }
    Ok(())
}

/// `op(a[i], b[i])` for every element.
pub fn ew_apply(op: EwOp, a: &MpMatrix, b: &MpMatrix, variant: KernelVariant) -> Result<MpMatrix> {
    check_ew(op, a, b)?;
    Ok(mat_op(op, a, b, variant))
}

/// [`ew_apply`] writing into an existing matrix of the same shape.
pub fn ew_apply_into(
    op: EwOp,
    a: &MpMatrix,
    b: &MpMatrix,
    out: &mut MpMatrix,
    variant: KernelVariant,
) -> Result<()> {
    check_ew(op, a, b)?;
    a.check_same_shape(out, op.name())?;
    kernel::elementwise(op, a, b, out, variant);
    out.clear_padding();
    Ok(())
}

pub fn ew_add(a: &MpMatrix, b: &MpMatrix, variant: KernelVariant) -> Result<MpMatrix> {
    ew_apply(EwOp::Add, a, b, variant)
}

pub fn ew_mul(a: &MpMatrix, b: &MpMatrix, variant: KernelVariant) -> Result<MpMatrix> {
    ew_apply(EwOp::Mul, a, b, variant)
}

/// Element-wise `op` on operands already known to match.
pub(crate) fn mat_op(op: EwOp, a: &MpMatrix, b: &MpMatrix, variant: KernelVariant) -> MpMatrix {
    debug_assert!(a.check_same_shape(b, op.name()).is_ok());
    let mut out = MpMatrix::zeros(a.precision, a.rows, a.cols);
    kernel::elementwise(op, a, b, &mut out, variant);
    out.clear_padding();
    out
}

/// `a + b` with aligned pack loads and stores.
pub fn mat_add(a: &MpMatrix, b: &MpMatrix) -> Result<MpMatrix> {
    ew_apply(EwOp::Add, a, b, KernelVariant::SimdLoadStore)
}

/// `a - b` with aligned pack loads and stores.
pub fn mat_sub(a: &MpMatrix, b: &MpMatrix) -> Result<MpMatrix> {
    ew_apply(EwOp::Sub, a, b, KernelVariant::SimdLoadStore)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpf::Double2;

    #[test]
    fn layout() {
        let m = MpMatrix::zeros(Precision::TD, 3, 5);
        assert_eq!(m.stride(), 8);
        assert_eq!(m.plane(2).len(), 24);
        assert_eq!(m.plane(0).as_ptr() as usize % 32, 0);
        assert!(m.padding_is_zero());
        assert_eq!(MpMatrix::zeros(Precision::DD, 2, 8).stride(), 8);
        assert_eq!(MpMatrix::zeros(Precision::DD, 2, 0).stride(), 0);
    }

    #[test]
    fn element_access() {
        let mut m = MpMatrix::zeros(Precision::DD, 2, 3);
        m.set_element(1, 2, &[1.0, 2f64.powi(-60)]).unwrap();
        assert_eq!(m.element(1, 2), [1.0, 2f64.powi(-60), 0.0, 0.0]);
        assert_eq!(m.plane(1)[4 + 2], 2f64.powi(-60));
        assert!(m.set_element(2, 0, &[1.0]).is_err());
        assert!(m.set_element(0, 0, &[1.0, 0.0, 1.0]).is_err());
        assert!(m.set_element(0, 0, &[f64::NAN]).is_err());
        let v: Double2 = m.get(1, 2);
        assert_eq!(v.c(), [1.0, 2f64.powi(-60)]);
        assert!(m.padding_is_zero());
    }

    #[test]
    fn windows() {
        let m = MpMatrix::from_fn(Precision::DD, 3, 3, |i, j| vec![(i * 3 + j) as f64]).unwrap();
        let w = m.sub_padded(2, 1, 2, 2);
        assert_eq!(w.element(0, 0)[0], 7.0);
        assert_eq!(w.element(0, 1)[0], 8.0);
        assert_eq!(w.element(1, 0)[0], 0.0);
        let mut back = MpMatrix::zeros(Precision::DD, 3, 3);
        back.paste(2, 1, &w);
        assert_eq!(back.element(2, 2)[0], 8.0);
        assert!(back.padding_is_zero());
    }

    #[test]
    fn ew_examples() {
        let mut rng = MpRng::new(11);
        let a = MpMatrix::random(Precision::TD, 1, 7, &mut rng);
        let z = MpMatrix::zeros(Precision::TD, 1, 7);
        for v in KernelVariant::ALL {
            assert!(ew_add(&a, &z, v).unwrap().bits_eq(&a));
        }
        let wrong = MpMatrix::zeros(Precision::TD, 1, 6);
        assert!(matches!(ew_add(&a, &wrong, KernelVariant::Normal), Err(MpfError::ShapeMismatch { .. })));
        let dd = MpMatrix::zeros(Precision::DD, 1, 7);
        assert!(matches!(ew_mul(&a, &dd, KernelVariant::Normal), Err(MpfError::PrecisionMismatch { .. })));
        assert!(ew_apply(EwOp::TdAddMerge, &dd, &dd, KernelVariant::Normal).is_err());
        let mut out = MpMatrix::random(Precision::TD, 1, 7, &mut rng);
        ew_apply_into(EwOp::TdAddMerge, &a, &z, &mut out, KernelVariant::SimdSet).unwrap();
        assert!(out.bits_eq(&a));
        assert!(ew_apply_into(EwOp::Add, &a, &a, &mut MpMatrix::zeros(Precision::TD, 7, 1), KernelVariant::Normal).is_err());
    }

    #[test]
    fn ew_matches_scalar_loop() {
        let mut rng = MpRng::new(5);
        let a = MpMatrix::random_signed(Precision::DD, 1, 5, &mut rng);
        let b = MpMatrix::random_signed(Precision::DD, 1, 5, &mut rng);
        for v in KernelVariant::ALL {
            let s = ew_add(&a, &b, v).unwrap();
            let p = ew_mul(&a, &b, v).unwrap();
            let d = mat_sub(&a, &b).unwrap();
            for j in 0..5 {
                let (x, y) = (a.get::<Double2>(0, j), b.get::<Double2>(0, j));
                assert!(s.get::<Double2>(0, j).bits_eq(&crate::mpf::dd_add(x, y)));
                assert!(p.get::<Double2>(0, j).bits_eq(&crate::mpf::dd_mul(x, y)));
                assert!(d.get::<Double2>(0, j).bits_eq(&(x - y)));
            }
            assert!(s.padding_is_zero() && p.padding_is_zero());
        }
    }

    #[test]
    fn variant_names() {
        for v in KernelVariant::ALL {
            assert_eq!(v.name().parse::<KernelVariant>().unwrap(), v);
        }
        assert!("avx".parse::<KernelVariant>().is_err());
    }
}
