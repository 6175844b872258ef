//! Naive, blocked and Strassen multiplication, serial and parallel.

use std::fmt;
use std::marker::PhantomData;
use std::str::FromStr;

use super::kernel::{Band, ProductKernel, Tiles};
use super::{mat_op, with_format, EwOp, KernelVariant, MpMatrix};
use crate::error::{invalid, MpfError, Result};
use crate::mpf::MpFormat;
use crate::simd::Backend;

pub const DEFAULT_N_MIN: usize = 32;
pub const DEFAULT_CUTOFF: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Naive,
    Block,
    Strassen,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Naive, Algorithm::Block, Algorithm::Strassen];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Naive => "naive",
            Algorithm::Block => "block",
            Algorithm::Strassen => "strassen",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = MpfError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "naive" => Ok(Algorithm::Naive),
            "block" | "blocked" => Ok(Algorithm::Block),
            "strassen" => Ok(Algorithm::Strassen),
            _ => Err(MpfError::Parse {
                input: s.to_string(),
                reason: "expected naive, block or strassen".into(),
            }),
        }
    }
}

/// Work done by one Strassen multiplication.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StrassenStats {
    /// Number of leaf products handed to the blocked kernel.
    pub leaf_calls: u64,
    /// Scalar multiplications performed inside leaf products.
    pub leaf_mults: u64,
    /// Every multi-component add, sub and mul, leaves and combinations.
    pub mpf_ops: u64,
}

impl StrassenStats {
    fn merge(&mut self, o: StrassenStats) {
        self.leaf_calls += o.leaf_calls;
        self.leaf_mults += o.leaf_mults;
        self.mpf_ops += o.mpf_ops;
    }
}

fn check_product(a: &MpMatrix, b: &MpMatrix, op: &'static str) -> Result<()> {
    a.check_precision(b, op)?;
    if a.cols() != b.rows() {
        return Err(a.shape_error(b, op));
    }
    Ok(())
}

fn positive(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        return Err(invalid(format!("{name} must be at least 1")));
    }
    Ok(())
}

fn row_bands(c: &mut MpMatrix, band_rows: usize) -> Vec<Band<'_>> {
    let (rows, stride) = (c.rows(), c.stride());
    let mut planes: Vec<_> = c
        .planes_mut()
        .into_iter()
        .map(|p| p.chunks_mut(band_rows * stride.max(1)))
        .collect();
    let mut bands = Vec::new();
    let mut row0 = 0;
    while row0 < rows {
        let h = band_rows.min(rows - row0);
        let slices: Vec<&mut [f64]> = planes
            .iter_mut()
            .map(|it| it.next().unwrap_or_default())
            .collect();
        bands.push(Band {
            planes: slices,
            row0,
            rows: h,
        });
        row0 += h;
    }
    bands
}

fn run_product<F: MpFormat>(
    a: &MpMatrix,
    b: &MpMatrix,
    bands: &mut [Band<'_>],
    c_stride: usize,
    tiles: Tiles,
    variant: KernelVariant,
) {
    let pa = a.planes_ref();
    let pb = b.planes_ref();
    Backend::active().run(ProductKernel::<F> {
        a: &pa,
        a_stride: a.stride(),
        b: &pb,
        b_stride: b.stride(),
        bands,
        c_stride,
        inner: a.cols(),
        cols: b.cols(),
        tiles,
        variant,
        _f: PhantomData,
    });
}

fn product(a: &MpMatrix, b: &MpMatrix, tiles: Tiles, variant: KernelVariant, workers: usize) -> MpMatrix {
    let mut c = MpMatrix::zeros(a.precision(), a.rows(), b.cols());
    let stride = c.stride();
    let band_rows = if workers <= 1 { a.rows().max(1) } else { tiles.i.min(a.rows().max(1)) };
    {
        let mut bands = row_bands(&mut c, band_rows);
        if workers <= 1 || bands.len() <= 1 {
            with_format!(a.precision(), F => run_product::<F>(a, b, &mut bands, stride, tiles, variant));
        } else {
            // Band `t` goes to worker `t % workers`; bands are disjoint so
            // no two threads touch the same output cell.
            let mut per_worker: Vec<Vec<Band<'_>>> = (0..workers).map(|_| Vec::new()).collect();
            for (t, band) in bands.into_iter().enumerate() {
                per_worker[t % workers].push(band);
            }
            std::thread::scope(|s| {
                for mut mine in per_worker.into_iter().filter(|v| !v.is_empty()) {
                    s.spawn(move || {
                        with_format!(a.precision(), F => {
                            run_product::<F>(a, b, &mut mine, stride, tiles, variant)
                        })
                    });
                }
            });
        }
    }
    c.clear_padding();
    c
}

/// `A * B` by the row-major triple loop (`i`, `k`, `j`), each element
/// accumulated in ascending `k`.
pub fn matmul_naive(a: &MpMatrix, b: &MpMatrix, variant: KernelVariant) -> Result<MpMatrix> {
    check_product(a, b, "matmul_naive")?;
    Ok(product(a, b, Tiles::WHOLE, variant, 1))
}

/// `A * B` in `n_min`-sized tiles. Tiles of the inner dimension are visited
/// in ascending order, so the result is bit-identical to [`matmul_naive`].
pub fn matmul_block(a: &MpMatrix, b: &MpMatrix, n_min: usize, variant: KernelVariant) -> Result<MpMatrix> {
    check_product(a, b, "matmul_block")?;
    positive("n_min", n_min)?;
    Ok(product(a, b, Tiles::square(n_min), variant, 1))
}

/// [`matmul_block`] with bands of `n_min` output rows spread over
/// `workers` threads. Bit-identical to the serial result.
pub fn matmul_block_parallel(
    a: &MpMatrix,
    b: &MpMatrix,
    n_min: usize,
    variant: KernelVariant,
    workers: usize,
) -> Result<MpMatrix> {
    check_product(a, b, "matmul_block_parallel")?;
    positive("n_min", n_min)?;
    positive("workers", workers)?;
    Ok(product(a, b, Tiles::square(n_min), variant, workers))
}

#[derive(Clone, Copy)]
struct StrassenParams {
    cutoff: usize,
    n_min: usize,
    variant: KernelVariant,
}

fn is_leaf(a: &MpMatrix, b: &MpMatrix, cutoff: usize) -> bool {
    let (m, k, p) = (a.rows(), a.cols(), b.cols());
    m.max(k).max(p) <= cutoff || m.min(k).min(p) < 2
}

fn leaf(a: &MpMatrix, b: &MpMatrix, prm: StrassenParams, stats: &mut StrassenStats) -> MpMatrix {
    let (m, k, p) = (a.rows() as u64, a.cols() as u64, b.cols() as u64);
    stats.leaf_calls += 1;
    stats.leaf_mults += m * k * p;
    stats.mpf_ops += m * p * (2 * k).saturating_sub(1);
    product(a, b, Tiles::square(prm.n_min), prm.variant, 1)
}

fn counted(op: EwOp, x: &MpMatrix, y: &MpMatrix, prm: StrassenParams, stats: &mut StrassenStats) -> MpMatrix {
    stats.mpf_ops += (x.rows() * x.cols()) as u64;
    mat_op(op, x, y, prm.variant)
}

/// The seven operand pairs of one Strassen level, after padding every
/// dimension to even.
fn operands(a: &MpMatrix, b: &MpMatrix, prm: StrassenParams, stats: &mut StrassenStats) -> Vec<(MpMatrix, MpMatrix)> {
    let (mh, kh, ph) = (a.rows().div_ceil(2), a.cols().div_ceil(2), b.cols().div_ceil(2));
    let a11 = a.sub_padded(0, 0, mh, kh);
    let a12 = a.sub_padded(0, kh, mh, kh);
    let a21 = a.sub_padded(mh, 0, mh, kh);
    let a22 = a.sub_padded(mh, kh, mh, kh);
    let b11 = b.sub_padded(0, 0, kh, ph);
    let b12 = b.sub_padded(0, ph, kh, ph);
    let b21 = b.sub_padded(kh, 0, kh, ph);
    let b22 = b.sub_padded(kh, ph, kh, ph);
    let mut add = |x: &MpMatrix, y: &MpMatrix| counted(EwOp::Add, x, y, prm, stats);
    let s1 = add(&a11, &a22);
    let s2 = add(&b11, &b22);
    let s3 = add(&a21, &a22);
    let s5 = add(&a11, &a12);
    let s6 = add(&b11, &b12);
    let s7 = add(&b21, &b22);
    let mut sub = |x: &MpMatrix, y: &MpMatrix| counted(EwOp::Sub, x, y, prm, stats);
    let d3 = sub(&b12, &b22);
    let d4 = sub(&b21, &b11);
    let d6 = sub(&a21, &a11);
    let d7 = sub(&a12, &a22);
    vec![
        (s1, s2),
        (s3, b11),
        (a11, d3),
        (a22.clone(), d4),
        (s5, b22),
        (d6, s6),
        (d7, s7),
    ]
}

fn combine(m: Vec<MpMatrix>, rows: usize, cols: usize, prm: StrassenParams, stats: &mut StrassenStats) -> MpMatrix {
    let mut add = |x: &MpMatrix, y: &MpMatrix| counted(EwOp::Add, x, y, prm, stats);
    let c12 = add(&m[2], &m[4]);
    let c21 = add(&m[1], &m[3]);
    let t = add(&m[0], &m[3]);
    let u = counted(EwOp::Sub, &t, &m[4], prm, stats);
    let c11 = counted(EwOp::Add, &u, &m[6], prm, stats);
    let t = counted(EwOp::Sub, &m[0], &m[1], prm, stats);
    let u = counted(EwOp::Add, &t, &m[2], prm, stats);
    let c22 = counted(EwOp::Add, &u, &m[5], prm, stats);
    let (hr, hc) = (c11.rows(), c11.cols());
    let mut c = MpMatrix::zeros(c11.precision(), rows, cols);
    c.paste(0, 0, &c11);
    c.paste(0, hc, &c12);
    c.paste(hr, 0, &c21);
    c.paste(hr, hc, &c22);
    c
}

fn strassen_rec(a: &MpMatrix, b: &MpMatrix, prm: StrassenParams, stats: &mut StrassenStats) -> MpMatrix {
    if is_leaf(a, b, prm.cutoff) {
        return leaf(a, b, prm, stats);
    }
    let ops = operands(a, b, prm, stats);
    let m: Vec<MpMatrix> = ops.iter().map(|(x, y)| strassen_rec(x, y, prm, stats)).collect();
    combine(m, a.rows(), b.cols(), prm, stats)
}

fn strassen_params(cutoff: usize, n_min: usize, variant: KernelVariant) -> Result<StrassenParams> {
    positive("cutoff", cutoff)?;
    positive("n_min", n_min)?;
    Ok(StrassenParams { cutoff, n_min, variant })
}

/// Strassen's seven-product recursion with per-level zero padding of odd
/// dimensions. Products whose largest dimension is at most `cutoff` go to
/// [`matmul_block`] with `n_min`.
pub fn matmul_strassen(
    a: &MpMatrix,
    b: &MpMatrix,
    cutoff: usize,
    n_min: usize,
    variant: KernelVariant,
) -> Result<MpMatrix> {
    matmul_strassen_stats(a, b, cutoff, n_min, variant).map(|(c, _)| c)
}

/// [`matmul_strassen`] that also reports operation counts.
pub fn matmul_strassen_stats(
    a: &MpMatrix,
    b: &MpMatrix,
    cutoff: usize,
    n_min: usize,
    variant: KernelVariant,
) -> Result<(MpMatrix, StrassenStats)> {
    check_product(a, b, "matmul_strassen")?;
    let prm = strassen_params(cutoff, n_min, variant)?;
    let mut stats = StrassenStats::default();
    let c = strassen_rec(a, b, prm, &mut stats);
    Ok((c, stats))
}

/// [`matmul_strassen`] with the seven top-level products computed on up to
/// `workers` threads. Bit-identical to the serial result; the returned
/// counts equal the serial counts.
pub fn matmul_strassen_parallel(
    a: &MpMatrix,
    b: &MpMatrix,
    cutoff: usize,
    n_min: usize,
    variant: KernelVariant,
    workers: usize,
) -> Result<(MpMatrix, StrassenStats)> {
    check_product(a, b, "matmul_strassen_parallel")?;
    let prm = strassen_params(cutoff, n_min, variant)?;
    positive("workers", workers)?;
    let mut stats = StrassenStats::default();
    if workers == 1 || is_leaf(a, b, cutoff) {
        if workers > 1 {
            stats.leaf_calls += 1;
            let (m, k, p) = (a.rows() as u64, a.cols() as u64, b.cols() as u64);
            stats.leaf_mults += m * k * p;
            stats.mpf_ops += m * p * (2 * k).saturating_sub(1);
            return Ok((product(a, b, Tiles::square(n_min), variant, workers), stats));
        }
        let c = strassen_rec(a, b, prm, &mut stats);
        return Ok((c, stats));
    }
    let ops = operands(a, b, prm, &mut stats);
    let threads = workers.min(ops.len());
    let mut results: Vec<Option<(MpMatrix, StrassenStats)>> = (0..ops.len()).map(|_| None).collect();
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let ops = &ops;
                s.spawn(move || {
                    (t..ops.len())
                        .step_by(threads)
                        .map(|i| {
                            let mut st = StrassenStats::default();
                            let m = strassen_rec(&ops[i].0, &ops[i].1, prm, &mut st);
                            (i, m, st)
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, m, st) in h.join().expect("worker panicked") {
                results[i] = Some((m, st));
            }
        }
    });
    let mut m = Vec::with_capacity(7);
    for r in results {
        let (mat, st) = r.expect("every product computed");
        stats.merge(st);
        m.push(mat);
    }
    let c = combine(m, a.rows(), b.cols(), prm, &mut stats);
    Ok((c, stats))
}

/// Dispatches to one of the algorithms with its default parameters
/// overridden by `n_min` and `cutoff`.
pub fn matmul(
    algo: Algorithm,
    a: &MpMatrix,
    b: &MpMatrix,
    n_min: usize,
    cutoff: usize,
    variant: KernelVariant,
    workers: usize,
) -> Result<MpMatrix> {
    match algo {
        Algorithm::Naive => matmul_naive(a, b, variant),
        Algorithm::Block => matmul_block_parallel(a, b, n_min, variant, workers),
        Algorithm::Strassen => {
            matmul_strassen_parallel(a, b, cutoff, n_min, variant, workers).map(|(c, _)| c)
        }
    }
}
