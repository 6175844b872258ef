use std::arch::x86_64::*;
use std::fmt;

use super::{is_aligned, LaneKernel, Lanes};

/// One `__m256d` register. Values of this type exist only inside kernels
/// started by [`run`], which requires AVX2 and FMA.
#[derive(Clone, Copy)]
#[repr(transparent)]
pub(crate) struct F64x4(__m256d);

// SAFETY: plain data.
unsafe impl Send for F64x4 {}
unsafe impl Sync for F64x4 {}

impl fmt::Debug for F64x4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("F64x4").field(&self.to_array()).finish()
    }
}

/// # Safety
/// The CPU must support AVX2 and FMA.
#[target_feature(enable = "avx2,fma")]
pub(crate) unsafe fn run<K: LaneKernel>(kernel: K) -> K::Output {
    kernel.run::<F64x4>()
}

// SAFETY (all blocks below): an F64x4 can only be observed inside `run`, so
// the AVX2/FMA instructions are available whenever these methods execute.
impl Lanes for F64x4 {
    const WIDTH: usize = 4;

    #[inline(always)]
    fn splat(v: f64) -> Self {
        unsafe { F64x4(_mm256_set1_pd(v)) }
    }

    #[inline(always)]
    fn from_fn<F: FnMut(usize) -> f64>(mut f: F) -> Self {
        let (a, b, c, d) = (f(0), f(1), f(2), f(3));
        unsafe { F64x4(_mm256_set_pd(d, c, b, a)) }
    }

    #[inline(always)]
    fn to_array(self) -> [f64; 4] {
        let mut out = super::LaneQuad::ZERO;
        unsafe { _mm256_store_pd(out.0.as_mut_ptr(), self.0) };
        out.0
    }

    #[inline(always)]
    fn add(self, rhs: Self) -> Self {
        unsafe { F64x4(_mm256_add_pd(self.0, rhs.0)) }
    }

    #[inline(always)]
    fn sub(self, rhs: Self) -> Self {
        unsafe { F64x4(_mm256_sub_pd(self.0, rhs.0)) }
    }

    #[inline(always)]
    fn mul(self, rhs: Self) -> Self {
        unsafe { F64x4(_mm256_mul_pd(self.0, rhs.0)) }
    }

    #[inline(always)]
    fn mul_add(self, b: Self, c: Self) -> Self {
        unsafe { F64x4(_mm256_fmadd_pd(self.0, b.0, c.0)) }
    }

    #[inline(always)]
    fn neg(self) -> Self {
        unsafe { F64x4(_mm256_xor_pd(self.0, _mm256_set1_pd(-0.0))) }
    }

    #[inline(always)]
    fn nonzero(self) -> Self {
        unsafe { F64x4(_mm256_cmp_pd::<_CMP_NEQ_UQ>(self.0, _mm256_setzero_pd())) }
    }

    #[inline(always)]
    fn mask_and(self, rhs: Self) -> Self {
        unsafe { F64x4(_mm256_and_pd(self.0, rhs.0)) }
    }

    #[inline(always)]
    fn mask_or(self, rhs: Self) -> Self {
        unsafe { F64x4(_mm256_or_pd(self.0, rhs.0)) }
    }

    #[inline(always)]
    fn mask_andnot(self, rhs: Self) -> Self {
        unsafe { F64x4(_mm256_andnot_pd(self.0, rhs.0)) }
    }

    #[inline(always)]
    fn mask_all() -> Self {
        unsafe { F64x4(_mm256_castsi256_pd(_mm256_set1_epi64x(-1))) }
    }

    #[inline(always)]
    fn mask_none() -> Self {
        unsafe { F64x4(_mm256_setzero_pd()) }
    }

    #[inline(always)]
    fn select(mask: Self, a: Self, b: Self) -> Self {
        unsafe { F64x4(_mm256_blendv_pd(b.0, a.0, mask.0)) }
    }

    #[inline(always)]
    fn load(src: &[f64]) -> Self {
        assert!(src.len() >= 4 && is_aligned(src));
        unsafe { F64x4(_mm256_load_pd(src.as_ptr())) }
    }

    #[inline(always)]
    fn store(self, dst: &mut [f64]) {
        assert!(dst.len() >= 4 && is_aligned(dst));
        unsafe { _mm256_store_pd(dst.as_mut_ptr(), self.0) }
    }
}
