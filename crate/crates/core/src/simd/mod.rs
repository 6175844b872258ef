//! Four-lane binary64 packs.
//!
//! All arithmetic in this crate is written once, generically over [`Lanes`].
//! Three implementations exist:
//!
//! * `f64`: one lane, used for the scalar API and the `Normal` kernels;
//! * [`LaneQuad`]: four lanes in plain Rust, the portable path;
//! * an AVX2+FMA register type, reachable only through [`Backend::run`]
//!   on hardware that supports it.
//!
//! Every lane of every operation computes exactly what the scalar code
//! computes on that lane, so the three paths are bit-identical.

#[cfg(target_arch = "x86_64")]
mod avx2;
mod ops;

use std::fmt;
use std::sync::OnceLock;

use crate::error::{invalid, MpfError, Result};

pub use ops::*;
pub(crate) use ops::lane_ops;

/// Number of binary64 lanes in a pack.
pub const LANES: usize = 4;

/// Environment variable that forces the portable path when set to `1`.
pub const FORCE_PORTABLE_ENV: &str = "MPFKIT_FORCE_PORTABLE";

/// Lanewise binary64 arithmetic.
///
/// Masks returned by the comparison helpers are packs whose lanes are either
/// all-ones or all-zero bit patterns.
pub trait Lanes: Copy + Send + Sync + fmt::Debug + 'static {
    const WIDTH: usize;

    fn splat(v: f64) -> Self;

    /// Builds a pack lane by lane (the "set" style of data movement).
    fn from_fn<F: FnMut(usize) -> f64>(f: F) -> Self;

    /// Lanes in order; entries past `WIDTH` are zero.
    fn to_array(self) -> [f64; 4];

    #[inline(always)]
    fn lane(self, i: usize) -> f64 {
        self.to_array()[i]
    }

    fn add(self, rhs: Self) -> Self;
    fn sub(self, rhs: Self) -> Self;
    fn mul(self, rhs: Self) -> Self;

    /// `self * b + c` with a single rounding.
    fn mul_add(self, b: Self, c: Self) -> Self;

    /// Sign flip; exact.
    fn neg(self) -> Self;

    /// Mask of lanes where `self != 0.0` (NaN lanes count as nonzero).
    fn nonzero(self) -> Self;
    fn mask_and(self, rhs: Self) -> Self;
    fn mask_or(self, rhs: Self) -> Self;
    /// `!self & rhs`
    fn mask_andnot(self, rhs: Self) -> Self;
    fn mask_all() -> Self;
    fn mask_none() -> Self;

    /// Per lane: `mask ? a : b`.
    fn select(mask: Self, a: Self, b: Self) -> Self;

    /// Reads `WIDTH` consecutive values. For four-lane packs `src` must start
    /// on a 32-byte boundary.
    fn load(src: &[f64]) -> Self;

    /// Writes `WIDTH` consecutive values; same alignment rule as [`Lanes::load`].
    fn store(self, dst: &mut [f64]);

    #[inline(always)]
    fn from_quad(q: LaneQuad) -> Self {
        Self::load(&q.0)
    }

    #[inline(always)]
    fn to_quad(self) -> LaneQuad {
        LaneQuad(self.to_array())
    }
}

const MASK_BITS: u64 = u64::MAX;

impl Lanes for f64 {
    const WIDTH: usize = 1;

    #[inline(always)]
    fn splat(v: f64) -> Self {
        v
    }
    #[inline(always)]
    fn from_fn<F: FnMut(usize) -> f64>(mut f: F) -> Self {
        f(0)
    }
    #[inline(always)]
    fn to_array(self) -> [f64; 4] {
        [self, 0.0, 0.0, 0.0]
    }
    #[inline(always)]
    fn add(self, rhs: Self) -> Self {
        self + rhs
    }
    #[inline(always)]
    fn sub(self, rhs: Self) -> Self {
        self - rhs
    }
    #[inline(always)]
    fn mul(self, rhs: Self) -> Self {
        self * rhs
    }
    #[inline(always)]
    fn mul_add(self, b: Self, c: Self) -> Self {
        f64::mul_add(self, b, c)
    }
    #[inline(always)]
    fn neg(self) -> Self {
        -self
    }
    #[inline(always)]
    fn nonzero(self) -> Self {
        bool_mask(self != 0.0)
    }
    #[inline(always)]
    fn mask_and(self, rhs: Self) -> Self {
        f64::from_bits(self.to_bits() & rhs.to_bits())
    }
    #[inline(always)]
    fn mask_or(self, rhs: Self) -> Self {
        f64::from_bits(self.to_bits() | rhs.to_bits())
    }
    #[inline(always)]
    fn mask_andnot(self, rhs: Self) -> Self {
        f64::from_bits(!self.to_bits() & rhs.to_bits())
    }
    #[inline(always)]
    fn mask_all() -> Self {
        f64::from_bits(MASK_BITS)
    }
    #[inline(always)]
    fn mask_none() -> Self {
        0.0
    }
    #[inline(always)]
    fn select(mask: Self, a: Self, b: Self) -> Self {
        if mask.to_bits() != 0 {
            a
        } else {
            b
        }
    }
    #[inline(always)]
    fn load(src: &[f64]) -> Self {
        src[0]
    }
    #[inline(always)]
    fn store(self, dst: &mut [f64]) {
        dst[0] = self;
    }
}

#[inline(always)]
fn bool_mask(b: bool) -> f64 {
    f64::from_bits(if b { MASK_BITS } else { 0 })
}

/// Four binary64 lanes, 32-byte aligned.
#[derive(Clone, Copy, Default, PartialEq)]
#[repr(C, align(32))]
pub struct LaneQuad(pub [f64; 4]);

impl LaneQuad {
    pub const ZERO: LaneQuad = LaneQuad([0.0; 4]);

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        LaneQuad([a, b, c, d])
    }

    /// Bitwise equality (distinguishes `-0.0` and NaN payloads).
    pub fn bits_eq(&self, other: &LaneQuad) -> bool {
        self.0
            .iter()
            .zip(other.0.iter())
            .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl fmt::Debug for LaneQuad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("LaneQuad").field(&self.0).finish()
    }
}

impl From<[f64; 4]> for LaneQuad {
    fn from(v: [f64; 4]) -> Self {
        LaneQuad(v)
    }
}

#[inline(always)]
fn lanewise(a: LaneQuad, f: impl Fn(f64) -> f64) -> LaneQuad {
    LaneQuad([f(a.0[0]), f(a.0[1]), f(a.0[2]), f(a.0[3])])
}

#[inline(always)]
fn lanewise2(a: LaneQuad, b: LaneQuad, f: impl Fn(f64, f64) -> f64) -> LaneQuad {
    LaneQuad([
        f(a.0[0], b.0[0]),
        f(a.0[1], b.0[1]),
        f(a.0[2], b.0[2]),
        f(a.0[3], b.0[3]),
    ])
}

impl Lanes for LaneQuad {
    const WIDTH: usize = 4;

    #[inline(always)]
    fn splat(v: f64) -> Self {
        LaneQuad([v; 4])
    }
    #[inline(always)]
    fn from_fn<F: FnMut(usize) -> f64>(mut f: F) -> Self {
        LaneQuad([f(0), f(1), f(2), f(3)])
    }
    #[inline(always)]
    fn to_array(self) -> [f64; 4] {
        self.0
    }
    #[inline(always)]
    fn add(self, rhs: Self) -> Self {
        lanewise2(self, rhs, |a, b| a + b)
    }
    #[inline(always)]
    fn sub(self, rhs: Self) -> Self {
        lanewise2(self, rhs, |a, b| a - b)
    }
    #[inline(always)]
    fn mul(self, rhs: Self) -> Self {
        lanewise2(self, rhs, |a, b| a * b)
    }
    #[inline(always)]
    fn mul_add(self, b: Self, c: Self) -> Self {
        LaneQuad([
            self.0[0].mul_add(b.0[0], c.0[0]),
            self.0[1].mul_add(b.0[1], c.0[1]),
            self.0[2].mul_add(b.0[2], c.0[2]),
            self.0[3].mul_add(b.0[3], c.0[3]),
        ])
    }
    #[inline(always)]
    fn neg(self) -> Self {
        lanewise(self, |a| -a)
    }
    #[inline(always)]
    fn nonzero(self) -> Self {
        lanewise(self, |a| bool_mask(a != 0.0))
    }
    #[inline(always)]
    fn mask_and(self, rhs: Self) -> Self {
        lanewise2(self, rhs, |a, b| a.mask_and(b))
    }
    #[inline(always)]
    fn mask_or(self, rhs: Self) -> Self {
        lanewise2(self, rhs, |a, b| a.mask_or(b))
    }
    #[inline(always)]
    fn mask_andnot(self, rhs: Self) -> Self {
        lanewise2(self, rhs, |a, b| a.mask_andnot(b))
    }
    #[inline(always)]
    fn mask_all() -> Self {
        LaneQuad([f64::from_bits(MASK_BITS); 4])
    }
    #[inline(always)]
    fn mask_none() -> Self {
        LaneQuad::ZERO
    }
    #[inline(always)]
    fn select(mask: Self, a: Self, b: Self) -> Self {
        LaneQuad([
            f64::select(mask.0[0], a.0[0], b.0[0]),
            f64::select(mask.0[1], a.0[1], b.0[1]),
            f64::select(mask.0[2], a.0[2], b.0[2]),
            f64::select(mask.0[3], a.0[3], b.0[3]),
        ])
    }
    #[inline(always)]
    fn load(src: &[f64]) -> Self {
        debug_assert!(is_aligned(src));
        LaneQuad([src[0], src[1], src[2], src[3]])
    }
    #[inline(always)]
    fn store(self, dst: &mut [f64]) {
        debug_assert!(is_aligned(dst));
        dst[..4].copy_from_slice(&self.0);
    }
    #[inline(always)]
    fn from_quad(q: LaneQuad) -> Self {
        q
    }
    #[inline(always)]
    fn to_quad(self) -> LaneQuad {
        self
    }
}

#[inline(always)]
pub(crate) fn is_aligned(s: &[f64]) -> bool {
    (s.as_ptr() as usize).is_multiple_of(std::mem::align_of::<LaneQuad>())
}

/// Views a slice of packs as its binary64 values.
pub fn quads_as_f64(q: &[LaneQuad]) -> &[f64] {
    // SAFETY: LaneQuad is repr(C) over [f64; 4] with no padding, so a run of
    // n packs is exactly 4n contiguous f64 values.
    unsafe { std::slice::from_raw_parts(q.as_ptr() as *const f64, q.len() * LANES) }
}

pub fn quads_as_f64_mut(q: &mut [LaneQuad]) -> &mut [f64] {
    // SAFETY: as in `quads_as_f64`; the borrow is unique.
    unsafe { std::slice::from_raw_parts_mut(q.as_mut_ptr() as *mut f64, q.len() * LANES) }
}

/// Loads the pack at `offset` of a component plane.
///
/// `offset` must be a multiple of 4 and the plane must be 32-byte aligned
/// (every [`crate::linalg::MpMatrix`] plane is).
pub fn lq_load_aligned(plane: &[f64], offset: usize) -> Result<LaneQuad> {
    check_aligned_access(plane, offset)?;
    Ok(LaneQuad::load(&plane[offset..offset + LANES]))
}

pub fn lq_store_aligned(plane: &mut [f64], offset: usize, v: LaneQuad) -> Result<()> {
    check_aligned_access(plane, offset)?;
    v.store(&mut plane[offset..offset + LANES]);
    Ok(())
}

fn check_aligned_access(plane: &[f64], offset: usize) -> Result<()> {
    if !offset.is_multiple_of(LANES) {
        return Err(invalid(format!("offset {offset} is not a multiple of {LANES}")));
    }
    if offset + LANES > plane.len() {
        return Err(invalid(format!(
            "offset {offset} runs past plane of length {}",
            plane.len()
        )));
    }
    if !is_aligned(plane) {
        return Err(invalid("plane is not 32-byte aligned"));
    }
    Ok(())
}

/// A computation that is generic over the lane implementation.
///
/// `run` implementations should be `#[inline(always)]`: the hardware backend
/// compiles them inside a function with the SIMD target features enabled.
pub trait LaneKernel {
    type Output;
    fn run<L: Lanes>(self) -> Self::Output;
}

/// Which [`Lanes`] implementation executes four-lane work.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Backend {
    Portable,
    Avx2Fma,
}

impl Backend {
    /// Hardware backend available on this machine, if any.
    pub fn hardware() -> Option<Backend> {
        #[cfg(target_arch = "x86_64")]
        {
            if std::arch::is_x86_feature_detected!("avx2")
                && std::arch::is_x86_feature_detected!("fma")
            {
                return Some(Backend::Avx2Fma);
            }
        }
        None
    }

    /// The process-wide backend: the hardware path when available unless
    /// `MPFKIT_FORCE_PORTABLE=1`. The first call also verifies the
    /// floating-point environment and panics if it is unusable.
    pub fn active() -> Backend {
        static ACTIVE: OnceLock<Backend> = OnceLock::new();
        *ACTIVE.get_or_init(|| {
            if let Err(e) = check_environment() {
                panic!("{e}");
            }
            let forced = std::env::var(FORCE_PORTABLE_ENV).is_ok_and(|v| v.trim() == "1");
            match Backend::hardware() {
                Some(hw) if !forced => hw,
                _ => Backend::Portable,
            }
        })
    }

    /// Every backend usable on this machine, portable first.
    pub fn available() -> Vec<Backend> {
        let mut v = vec![Backend::Portable];
        v.extend(Backend::hardware());
        v
    }

    pub fn is_supported(self) -> bool {
        match self {
            Backend::Portable => true,
            Backend::Avx2Fma => Backend::hardware() == Some(Backend::Avx2Fma),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Backend::Portable => "portable",
            Backend::Avx2Fma => "avx2-fma",
        }
    }

    /// Runs `kernel` with this backend's lane type.
    ///
    /// # Panics
    /// If the backend is not supported by the running CPU.
    pub fn run<K: LaneKernel>(self, kernel: K) -> K::Output {
        match self {
            Backend::Portable => kernel.run::<LaneQuad>(),
            Backend::Avx2Fma => {
                #[cfg(target_arch = "x86_64")]
                {
                    assert!(self.is_supported(), "AVX2/FMA not supported on this CPU");
                    // SAFETY: feature support was just checked.
                    unsafe { avx2::run(kernel) }
                }
                #[cfg(not(target_arch = "x86_64"))]
                {
                    panic!("AVX2/FMA backend requires x86_64")
                }
            }
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Verifies round-to-nearest-even and a correctly rounded FMA.
pub fn check_environment() -> Result<()> {
    use std::hint::black_box;
    let tiny = black_box(2f64.powi(-53));
    let one = black_box(1.0f64);
    // Upward or downward rounding moves one of these off +-1.
    if one + tiny != 1.0 || -one - tiny != -1.0 {
        return Err(MpfError::Environment(
            "rounding mode is not round-to-nearest-even".into(),
        ));
    }
    // Toward-zero rounding keeps 1 + 3*2^-53 at 1 + 2^-52 instead of 1 + 2^-51.
    if one + black_box(3.0 * tiny) != 1.0 + 2f64.powi(-51) {
        return Err(MpfError::Environment(
            "rounding mode is not round-to-nearest-even".into(),
        ));
    }
    // (2^27+1)^2 - (2^54+2^28) = 1 only with a single rounding.
    let x = black_box(134_217_729.0f64);
    if x.mul_add(x, -(2f64.powi(54) + 2f64.powi(28))) != 1.0 {
        return Err(MpfError::Environment("fused multiply-add is not correctly rounded".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn environment_is_sane() {
        check_environment().unwrap();
        assert!(Backend::available().contains(&Backend::Portable));
        assert!(Backend::active().is_supported());
    }

    #[test]
    fn aligned_load_store() {
        let mut plane = vec![LaneQuad::ZERO; 2];
        let flat = quads_as_f64_mut(&mut plane);
        lq_store_aligned(flat, 0, LaneQuad::new(1.0, 2.0, 3.0, 4.0)).unwrap();
        let back = lq_load_aligned(flat, 0).unwrap();
        assert!(back.bits_eq(&LaneQuad::new(1.0, 2.0, 3.0, 4.0)));
        flat[4] = 7.0;
        flat[5] = 7.0;
        assert_eq!(lq_load_aligned(flat, 4).unwrap(), LaneQuad::new(7.0, 7.0, 0.0, 0.0));
        assert!(matches!(lq_load_aligned(flat, 3), Err(MpfError::InvalidArgument(_))));
        assert!(lq_load_aligned(flat, 8).is_err());
        assert!(lq_load_aligned(&flat[1..], 0).is_err());
    }

    #[test]
    fn masks() {
        let v = LaneQuad::new(0.0, -0.0, 1.0, f64::NAN);
        let m = v.nonzero();
        let picked = LaneQuad::select(m, LaneQuad::splat(1.0), LaneQuad::splat(2.0));
        assert_eq!(picked, LaneQuad::new(2.0, 2.0, 1.0, 1.0));
        let all = LaneQuad::mask_all();
        let none = LaneQuad::mask_none();
        assert!(none.mask_andnot(all).bits_eq(&all));
        assert!(all.mask_and(none).bits_eq(&none));
    }
}
