//! Single-operation entry points on [`LaneQuad`] values.
//!
//! Each operation is available as a method on [`Backend`] (explicit path) and
//! as a free function that uses [`Backend::active`]. These are convenient
//! for tests and small computations; bulk work should run a whole
//! [`LaneKernel`] through [`Backend::run`] instead of dispatching per call.

use super::{LaneQuad, Lanes};
use crate::eft::{self, SumPair};
use crate::error::{invalid, Result};

macro_rules! lane_ops {
    ($(
        $(#[$doc:meta])*
        fn $method:ident / $free:ident ( $($arg:ident : $aty:ty),* ) -> $ret:ty $body:block
    )*) => {
        impl $crate::simd::Backend {
            $(
                $(#[$doc])*
                #[allow(clippy::extra_unused_lifetimes)]
                pub fn $method<'a>(self, $($arg: $aty),*) -> $ret {
                    struct Kernel<'a> {
                        $($arg: $aty,)*
                        _life: ::std::marker::PhantomData<&'a ()>,
                    }
                    impl<'a> $crate::simd::LaneKernel for Kernel<'a> {
                        type Output = $ret;
                        #[inline(always)]
                        fn run<L: $crate::simd::Lanes>(self) -> $ret {
                            let Kernel { $($arg,)* _life } = self;
                            $body
                        }
                    }
                    self.run(Kernel { $($arg,)* _life: ::std::marker::PhantomData })
                }
            )*
        }

        $(
            $(#[$doc])*
            #[allow(clippy::extra_unused_lifetimes)]
            pub fn $free<'a>($($arg: $aty),*) -> $ret {
                $crate::simd::Backend::active().$method($($arg),*)
            }
        )*
    };
}
pub(crate) use lane_ops;

#[inline(always)]
fn up<L: Lanes>(q: LaneQuad) -> L {
    L::from_quad(q)
}

#[inline(always)]
fn down<L: Lanes>(v: L) -> LaneQuad {
    v.to_quad()
}

#[inline(always)]
fn down_pair<L: Lanes>(p: SumPair<L>) -> SumPair<LaneQuad> {
    SumPair::new(p.s.to_quad(), p.e.to_quad())
}

lane_ops! {
    /// Lanewise `a + b`.
    fn lq_add / lq_add(a: LaneQuad, b: LaneQuad) -> LaneQuad {
        down(up::<L>(a).add(up(b)))
    }

    /// Lanewise `a - b`.
    fn lq_sub / lq_sub(a: LaneQuad, b: LaneQuad) -> LaneQuad {
        down(up::<L>(a).sub(up(b)))
    }

    /// Lanewise `a * b`.
    fn lq_mul / lq_mul(a: LaneQuad, b: LaneQuad) -> LaneQuad {
        down(up::<L>(a).mul(up(b)))
    }

    /// Lanewise `a * b + c`, single rounding.
    fn lq_fma / lq_fma(a: LaneQuad, b: LaneQuad, c: LaneQuad) -> LaneQuad {
        down(up::<L>(a).mul_add(up(b), up(c)))
    }

    fn two_sum / simd_two_sum(a: LaneQuad, b: LaneQuad) -> SumPair<LaneQuad> {
        down_pair(eft::two_sum::<L>(up(a), up(b)))
    }

    /// Lanewise [`eft::quick_two_sum`]; same precondition per lane.
    fn quick_two_sum / simd_quick_two_sum(a: LaneQuad, b: LaneQuad) -> SumPair<LaneQuad> {
        down_pair(eft::quick_two_sum::<L>(up(a), up(b)))
    }

    fn two_prod / simd_two_prod(a: LaneQuad, b: LaneQuad) -> SumPair<LaneQuad> {
        down_pair(eft::two_prod::<L>(up(a), up(b)))
    }

    fn three_sum / simd_three_sum(a: LaneQuad, b: LaneQuad, c: LaneQuad) -> (LaneQuad, LaneQuad, LaneQuad) {
        let (s, e1, e2) = eft::three_sum::<L>(up(a), up(b), up(c));
        (down(s), down(e1), down(e2))
    }

    fn three_sum2 / simd_three_sum2(a: LaneQuad, b: LaneQuad, c: LaneQuad) -> (LaneQuad, LaneQuad) {
        let (s, e) = eft::three_sum2::<L>(up(a), up(b), up(c));
        (down(s), down(e))
    }

    fn vec_sum / simd_vec_sum(x: &'a [LaneQuad]) -> Result<Vec<LaneQuad>> {
        if x.len() < 2 {
            return Err(invalid(format!("vec_sum needs at least 2 terms, got {}", x.len())));
        }
        let mut v: Vec<L> = x.iter().map(|&q| up(q)).collect();
        eft::vec_sum_in_place(&mut v);
        Ok(v.into_iter().map(down).collect())
    }

    fn vseb / simd_vseb(k: usize, e: &'a [LaneQuad]) -> Result<Vec<LaneQuad>> {
        if k == 0 || k > 8 {
            return Err(invalid(format!("vseb output count must be in 1..=8, got {k}")));
        }
        if e.len() < k {
            return Err(invalid(format!("vseb({k}) needs at least {k} input terms, got {}", e.len())));
        }
        let v: Vec<L> = e.iter().map(|&q| up(q)).collect();
        let mut out = vec![L::splat(0.0); k];
        eft::vseb_into(&v, &mut out);
        Ok(out.into_iter().map(down).collect())
    }

    fn merge_by_magnitude / simd_merge_by_magnitude(x: [LaneQuad; 3], y: [LaneQuad; 3]) -> [LaneQuad; 6] {
        eft::merge_by_magnitude::<L>(x.map(up), y.map(up)).map(down)
    }

    fn renorm5 / simd_renorm5(c: [LaneQuad; 5]) -> [LaneQuad; 4] {
        eft::renorm5::<L>(c.map(up)).map(down)
    }
}
