//! Seeded generators for test and benchmark data.
//!
//! The bit source is SplitMix64. Multi-component values have a lead drawn
//! uniformly from `[1, 2)` and each tail component drawn as
//! `u * ulp(previous) / 2` with `u` from [`MpRng::tail_factor`], followed by
//! one renormalization pass so the result satisfies the nonoverlap
//! invariant.

use rand::{Rng, RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::eft::{quick_two_sum, renorm5, vseb_into};
use crate::mpf::{ulp, MpFormat};

#[derive(Clone, Debug)]
pub struct MpRng {
    inner: SplitMix64,
}

impl MpRng {
    pub fn new(seed: u64) -> Self {
        MpRng {
            inner: SplitMix64::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on the binary64 grid of `[1, 2)`.
    pub fn lead(&mut self) -> f64 {
        f64::from_bits(0x3ff0_0000_0000_0000 | (self.next_u64() >> 12))
    }

    /// A value in `(-1, 1)` with a full 53-bit significand: random sign,
    /// significand uniform on `[1, 2)`, scaled by `2^-(1+g)` with `g`
    /// geometric (`P(g = j) = 2^-(j+1)`, capped at 63).
    pub fn tail_factor(&mut self) -> f64 {
        let g = self.next_u64().trailing_zeros().min(63) as i32;
        self.sign() * self.lead() * 2f64.powi(-1 - g)
    }

    /// Uniform in `(-1, 1)`.
    pub fn symmetric(&mut self) -> f64 {
        loop {
            let u: f64 = self.inner.random_range(-1.0..1.0);
            if u != -1.0 {
                return u;
            }
        }
    }

    pub fn sign(&mut self) -> f64 {
        if self.next_u64() & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// A finite binary64 with random sign, full random significand and
    /// binary exponent uniform in `lo..=hi`.
    pub fn f64_with_exponent(&mut self, lo: i32, hi: i32) -> f64 {
        let e = self.inner.random_range(lo..=hi);
        scale2(self.sign() * self.lead(), e)
    }

    /// Normalized components with the lead in `[1, 2)`.
    pub fn components<const N: usize>(&mut self) -> [f64; N] {
        let mut c = [0.0; N];
        c[0] = self.lead();
        for k in 1..N {
            c[k] = self.tail_factor() * ulp(c[k - 1]) / 2.0;
        }
        renormalize(c)
    }

    pub fn value<F: MpFormat>(&mut self) -> F {
        let mut padded = [0.0; 4];
        let w = F::PRECISION.width();
        match w {
            2 => padded[..2].copy_from_slice(&self.components::<2>()),
            3 => padded[..3].copy_from_slice(&self.components::<3>()),
            _ => padded = self.components::<4>(),
        }
        F::from_padded(padded)
    }

    /// Like [`MpRng::value`] with a random sign.
    pub fn signed_value<F: MpFormat>(&mut self) -> F {
        let s = self.sign();
        let mut c = self.value::<F>().to_padded();
        for x in &mut c {
            *x *= s;
        }
        F::from_padded(c)
    }
}

/// `x * 2^e` with a single rounding. `powi` builds `2^e` from repeated
/// products and loses the value once `2^|e|` overflows.
fn scale2(mut x: f64, mut e: i32) -> f64 {
    let step = 2f64.powi(1000);
    while e > 1000 {
        x *= step;
        e -= 1000;
    }
    while e < -1000 {
        x /= step;
        e += 1000;
    }
    x * 2f64.powi(e)
}

fn renormalize<const N: usize>(c: [f64; N]) -> [f64; N] {
    let mut out = c;
    match N {
        1 => {}
        2 => {
            let r = quick_two_sum(c[0], c[1]);
            out[0] = r.s;
            out[1] = r.e;
        }
        3 => vseb_into(&c, &mut out),
        4 => out.copy_from_slice(&renorm5([c[0], c[1], c[2], c[3], 0.0])),
        _ => unreachable!("formats have 2 to 4 components"),
    }
    out
}
