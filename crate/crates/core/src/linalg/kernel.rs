//! Inner loops shared by the element-wise and product kernels.

use std::marker::PhantomData;

use super::{with_format, EwOp, KernelVariant, MpMatrix};
use crate::mpf::{kernels, pad, trunc, MpFormat};
use crate::simd::{Backend, LaneKernel, Lanes};

/// Data movement between a plane and a register value.
pub(crate) trait Movement {
    type L: Lanes;
    fn read(plane: &[f64], off: usize) -> Self::L;
    fn write(plane: &mut [f64], off: usize, v: Self::L);
}

pub(crate) struct Scalar;

impl Movement for Scalar {
    type L = f64;

    #[inline(always)]
    fn read(plane: &[f64], off: usize) -> f64 {
        plane[off]
    }

    #[inline(always)]
    fn write(plane: &mut [f64], off: usize, v: f64) {
        plane[off] = v;
    }
}

pub(crate) struct SetMove<L>(PhantomData<L>);

impl<L: Lanes> Movement for SetMove<L> {
    type L = L;

    #[inline(always)]
    fn read(plane: &[f64], off: usize) -> L {
        let s = &plane[off..off + 4];
        L::from_fn(|l| s[l])
    }

    #[inline(always)]
    fn write(plane: &mut [f64], off: usize, v: L) {
        let d = &mut plane[off..off + 4];
        for (l, x) in d.iter_mut().enumerate() {
            *x = v.lane(l);
        }
    }
}

pub(crate) struct LoadStore<L>(PhantomData<L>);

impl<L: Lanes> Movement for LoadStore<L> {
    type L = L;

    #[inline(always)]
    fn read(plane: &[f64], off: usize) -> L {
        L::load(&plane[off..off + 4])
    }

    #[inline(always)]
    fn write(plane: &mut [f64], off: usize, v: L) {
        v.store(&mut plane[off..off + 4])
    }
}

// Plain loops rather than `array::from_fn`: a closure does not inherit the
// caller's target features, which would put every load behind a call.
#[inline(always)]
fn read_num<M: Movement>(planes: &[&[f64]], w: usize, off: usize) -> [M::L; 4] {
    let mut out = [M::L::splat(0.0); 4];
    for (o, p) in out.iter_mut().zip(planes).take(w) {
        *o = M::read(p, off);
    }
    out
}

#[inline(always)]
fn read_out<M: Movement>(planes: &[&mut [f64]], w: usize, off: usize) -> [M::L; 4] {
    let mut out = [M::L::splat(0.0); 4];
    for (o, p) in out.iter_mut().zip(planes).take(w) {
        *o = M::read(p, off);
    }
    out
}

#[inline(always)]
fn write_num<M: Movement>(planes: &mut [&mut [f64]], w: usize, off: usize, v: [M::L; 4]) {
    for (k, p) in planes.iter_mut().enumerate().take(w) {
        M::write(p, off, v[k]);
    }
}

/// A binary operation on padded component arrays.
pub(crate) trait BinOp {
    fn apply<L: Lanes>(x: [L; 4], y: [L; 4]) -> [L; 4];
}

pub(crate) struct AddOp<F>(PhantomData<F>);
pub(crate) struct SubOp<F>(PhantomData<F>);
pub(crate) struct MulOp<F>(PhantomData<F>);
pub(crate) struct MergeAddOp;
pub(crate) struct MulQOp;

impl<F: MpFormat> BinOp for AddOp<F> {
    #[inline(always)]
    fn apply<L: Lanes>(x: [L; 4], y: [L; 4]) -> [L; 4] {
        F::add_lanes(x, y)
    }
}

impl<F: MpFormat> BinOp for SubOp<F> {
    #[inline(always)]
    fn apply<L: Lanes>(x: [L; 4], y: [L; 4]) -> [L; 4] {
        F::sub_lanes(x, y)
    }
}

impl<F: MpFormat> BinOp for MulOp<F> {
    #[inline(always)]
    fn apply<L: Lanes>(x: [L; 4], y: [L; 4]) -> [L; 4] {
        F::mul_lanes(x, y)
    }
}

impl BinOp for MergeAddOp {
    #[inline(always)]
    fn apply<L: Lanes>(x: [L; 4], y: [L; 4]) -> [L; 4] {
        pad(kernels::td_add_merge(trunc(x), trunc(y)))
    }
}

impl BinOp for MulQOp {
    #[inline(always)]
    fn apply<L: Lanes>(x: [L; 4], y: [L; 4]) -> [L; 4] {
        pad(kernels::td_mul_q(trunc(x), trunc(y)))
    }
}

struct EwKernel<'a, 'b, O> {
    a: &'a [&'b [f64]],
    b: &'a [&'b [f64]],
    out: &'a mut [&'b mut [f64]],
    w: usize,
    rows: usize,
    cols: usize,
    stride: usize,
    variant: KernelVariant,
    _op: PhantomData<O>,
}

impl<O: BinOp> EwKernel<'_, '_, O> {
    #[inline(always)]
    fn packed<M: Movement>(self) {
        let total = self.rows * self.stride;
        let mut off = 0;
        while off < total {
            let x = read_num::<M>(self.a, self.w, off);
            let y = read_num::<M>(self.b, self.w, off);
            write_num::<M>(self.out, self.w, off, O::apply(x, y));
            off += M::L::WIDTH;
        }
    }
}

impl<O: BinOp> LaneKernel for EwKernel<'_, '_, O> {
    type Output = ();

    #[inline(always)]
    fn run<L: Lanes>(self) {
        match self.variant {
            KernelVariant::Normal => {
                for i in 0..self.rows {
                    for j in 0..self.cols {
                        let off = i * self.stride + j;
                        let x = read_num::<Scalar>(self.a, self.w, off);
                        let y = read_num::<Scalar>(self.b, self.w, off);
                        write_num::<Scalar>(self.out, self.w, off, O::apply(x, y));
                    }
                }
            }
            KernelVariant::SimdSet => self.packed::<SetMove<L>>(),
            KernelVariant::SimdLoadStore => self.packed::<LoadStore<L>>(),
        }
    }
}

fn run_ew<O: BinOp>(a: &MpMatrix, b: &MpMatrix, out: &mut MpMatrix, variant: KernelVariant) {
    let (w, rows, cols, stride) = (a.width(), a.rows(), a.cols(), a.stride());
    let pa = a.planes_ref();
    let pb = b.planes_ref();
    let mut po = out.planes_mut();
    Backend::active().run(EwKernel::<O> {
        a: &pa,
        b: &pb,
        out: &mut po,
        w,
        rows,
        cols,
        stride,
        variant,
        _op: PhantomData,
    });
}

pub(crate) fn elementwise(op: EwOp, a: &MpMatrix, b: &MpMatrix, out: &mut MpMatrix, variant: KernelVariant) {
    match op {
        EwOp::TdAddMerge => run_ew::<MergeAddOp>(a, b, out, variant),
        EwOp::TdMulQ => run_ew::<MulQOp>(a, b, out, variant),
        EwOp::Add => with_format!(a.precision(), F => run_ew::<AddOp<F>>(a, b, out, variant)),
        EwOp::Sub => with_format!(a.precision(), F => run_ew::<SubOp<F>>(a, b, out, variant)),
        EwOp::Mul => with_format!(a.precision(), F => run_ew::<MulOp<F>>(a, b, out, variant)),
    }
}

/// Tile sizes of the product loop nest. `usize::MAX` means one tile.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Tiles {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

impl Tiles {
    pub(crate) const WHOLE: Tiles = Tiles {
        i: usize::MAX,
        j: usize::MAX,
        k: usize::MAX,
    };

    pub(crate) fn square(n: usize) -> Tiles {
        Tiles { i: n, j: n, k: n }
    }
}

/// Rows `row0 .. row0 + rows` of the output, one slice per plane.
pub(crate) struct Band<'p> {
    pub planes: Vec<&'p mut [f64]>,
    pub row0: usize,
    pub rows: usize,
}

pub(crate) struct ProductKernel<'a, 'p, F> {
    pub a: &'a [&'a [f64]],
    pub a_stride: usize,
    pub b: &'a [&'a [f64]],
    pub b_stride: usize,
    pub bands: &'a mut [Band<'p>],
    pub c_stride: usize,
    pub inner: usize,
    pub cols: usize,
    pub tiles: Tiles,
    pub variant: KernelVariant,
    pub _f: PhantomData<F>,
}

impl<F: MpFormat> ProductKernel<'_, '_, F> {
    /// `C[i][j] = sum_k A[i][k] * B[k][j]`, each element accumulated in
    /// ascending `k` whatever the tiling. Columns are processed
    /// `M::L::WIDTH` at a time up to `jlimit`.
    #[inline(always)]
    fn product<M: Movement>(&mut self, jlimit: usize, tile_j: usize) {
        let w = F::PRECISION.width();
        let step = M::L::WIDTH;
        let t = self.tiles;
        let (a, b) = (self.a, self.b);
        let (sa, sb, sc, kdim) = (self.a_stride, self.b_stride, self.c_stride, self.inner);
        for band in self.bands.iter_mut() {
            let end = band.row0 + band.rows;
            let c = &mut band.planes[..];
            for i0 in (band.row0..end).step_by(t.i) {
                let i1 = i0.saturating_add(t.i).min(end);
                for j0 in (0..jlimit).step_by(tile_j) {
                    let j1 = j0.saturating_add(tile_j).min(jlimit);
                    for k0 in (0..kdim).step_by(t.k) {
                        let k1 = k0.saturating_add(t.k).min(kdim);
                        for i in i0..i1 {
                            let crow = (i - band.row0) * sc;
                            for k in k0..k1 {
                                let aoff = i * sa + k;
                                let mut aik = [M::L::splat(0.0); 4];
                                for (x, p) in aik.iter_mut().zip(a).take(w) {
                                    *x = M::L::splat(p[aoff]);
                                }
                                let brow = k * sb;
                                let mut j = j0;
                                if k == 0 {
                                    while j < j1 {
                                        let p = F::mul_lanes(aik, read_num::<M>(b, w, brow + j));
                                        write_num::<M>(c, w, crow + j, p);
                                        j += step;
                                    }
                                } else {
                                    while j < j1 {
                                        let p = F::mul_lanes(aik, read_num::<M>(b, w, brow + j));
                                        let s = F::add_lanes(read_out::<M>(c, w, crow + j), p);
                                        write_num::<M>(c, w, crow + j, s);
                                        j += step;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

impl<F: MpFormat> LaneKernel for ProductKernel<'_, '_, F> {
    type Output = ();

    #[inline(always)]
    fn run<L: Lanes>(mut self) {
        let stride = self.c_stride;
        // Packed column tiles must stay on pack boundaries.
        let packed_tile = self.tiles.j.min(stride).div_ceil(4).max(1) * 4;
        match self.variant {
            KernelVariant::Normal => {
                let (cols, tj) = (self.cols, self.tiles.j);
                self.product::<Scalar>(cols, tj)
            }
            KernelVariant::SimdSet => self.product::<SetMove<L>>(stride, packed_tile),
            KernelVariant::SimdLoadStore => self.product::<LoadStore<L>>(stride, packed_tile),
        }
    }
}
