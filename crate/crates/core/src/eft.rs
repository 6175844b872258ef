//! Error-free transformations and renormalization.
//!
//! Everything here is generic over [`Lanes`], so the same code serves the
//! scalar API (`f64`) and the four-lane kernels. Operations whose scalar form
//! branches on data (`vseb`, `renorm5`) have a second, mask-based form for
//! multi-lane packs; the two forms perform the same floating-point operations
//! in the same order on every lane and are tested against each other.
//!
//! All functions assume round-to-nearest-even (see
//! [`crate::simd::check_environment`]). Exactness claims hold for finite
//! inputs whose results neither overflow nor underflow; outside that domain
//! the results are finite but carry no guarantee.

use crate::error::{invalid, Result};
use crate::simd::Lanes;

/// A rounded result and its exact residual: `s + e` equals the exact value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SumPair<T = f64> {
    pub s: T,
    pub e: T,
}

impl<T> SumPair<T> {
    #[inline(always)]
    pub fn new(s: T, e: T) -> Self {
        SumPair { s, e }
    }
}

impl SumPair<f64> {
    pub fn bits_eq(&self, other: &Self) -> bool {
        self.s.to_bits() == other.s.to_bits() && self.e.to_bits() == other.e.to_bits()
    }
}

/// Knuth's branch-free TwoSum.
#[inline(always)]
pub fn two_sum<L: Lanes>(a: L, b: L) -> SumPair<L> {
    let s = a.add(b);
    let bb = s.sub(a);
    let e = a.sub(s.sub(bb)).add(b.sub(bb));
    SumPair::new(s, e)
}

/// Dekker's FastTwoSum. Requires `|a| >= |b|` or `a == 0` on every lane;
/// debug builds check this.
#[inline(always)]
pub fn quick_two_sum<L: Lanes>(a: L, b: L) -> SumPair<L> {
    if cfg!(debug_assertions) {
        for i in 0..L::WIDTH {
            let (x, y) = (a.lane(i), b.lane(i));
            debug_assert!(
                !(x.is_finite() && y.is_finite()) || x == 0.0 || x.abs() >= y.abs(),
                "quick_two_sum precondition violated: |{x:e}| < |{y:e}|"
            );
        }
    }
    fast_two_sum(a, b)
}

// Unchecked FastTwoSum for internal chains, where the ordering holds up to
// the slack the surrounding algorithm tolerates.
#[inline(always)]
pub(crate) fn fast_two_sum<L: Lanes>(a: L, b: L) -> SumPair<L> {
    let s = a.add(b);
    let e = b.sub(s.sub(a));
    SumPair::new(s, e)
}

/// Exact product via fused multiply-add.
#[inline(always)]
pub fn two_prod<L: Lanes>(a: L, b: L) -> SumPair<L> {
    let p = a.mul(b);
    let e = a.mul_add(b, p.neg());
    SumPair::new(p, e)
}

const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1

#[inline]
fn split(a: f64) -> (f64, f64) {
    let t = SPLITTER * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

/// Dekker's TwoProduct without FMA. Bit-identical to [`two_prod`] whenever
/// both are exact: `|a|, |b| < 2^996` and `|a*b| >= 2^-969`.
pub fn two_prod_split(a: f64, b: f64) -> SumPair {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let e = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    SumPair::new(p, e)
}

/// `(s, e1, e2)` with `s + e1 + e2 = a + b + c` exactly.
#[inline(always)]
pub fn three_sum<L: Lanes>(a: L, b: L, c: L) -> (L, L, L) {
    let t = two_sum(a, b);
    let u = two_sum(c, t.s);
    let v = two_sum(t.e, u.e);
    (u.s, v.s, v.e)
}

/// Like [`three_sum`] with the two residuals folded into one rounded term.
#[inline(always)]
pub fn three_sum2<L: Lanes>(a: L, b: L, c: L) -> (L, L) {
    let t = two_sum(a, b);
    let u = two_sum(c, t.s);
    (u.s, t.e.add(u.e))
}

/// VecSum, in place: a TwoSum chain from the last element to the first.
/// The exact sum is preserved and `x[0]` ends up as the leading term.
#[inline(always)]
pub fn vec_sum_in_place<L: Lanes>(x: &mut [L]) {
    let n = x.len();
    if n < 2 {
        return;
    }
    let mut acc = x[n - 1];
    for i in (0..n - 1).rev() {
        let t = two_sum(x[i], acc);
        x[i + 1] = t.e;
        acc = t.s;
    }
    x[0] = acc;
}

/// VecSum over a sequence of at least two values.
pub fn vec_sum(x: &[f64]) -> Result<Vec<f64>> {
    if x.len() < 2 {
        return Err(invalid(format!("vec_sum needs at least 2 terms, got {}", x.len())));
    }
    let mut out = x.to_vec();
    vec_sum_in_place(&mut out);
    Ok(out)
}

/// VecSumErrBranch: compresses `e` into `out.len()` terms, advancing to the
/// next output only when the FastTwoSum residual is nonzero. Unused outputs
/// are zero.
#[inline(always)]
pub fn vseb_into<L: Lanes>(e: &[L], out: &mut [L]) {
    debug_assert!(!out.is_empty() && !e.is_empty());
    if L::WIDTH == 1 {
        vseb_branching(e, out)
    } else {
        vseb_masked(e, out)
    }
}

#[inline(always)]
fn vseb_branching<L: Lanes>(e: &[L], out: &mut [L]) {
    let k = out.len();
    let zero = L::splat(0.0);
    out.fill(zero);
    let mut j = 0;
    let mut eps = e[0];
    for &next in &e[1..] {
        let t = fast_two_sum(eps, next);
        out[j] = t.s;
        if t.e.lane(0) != 0.0 {
            if j >= k - 1 {
                return;
            }
            j += 1;
            eps = t.e;
        } else {
            eps = t.s;
        }
    }
    if eps.lane(0) != 0.0 {
        out[j] = eps;
    }
}

// Same data flow as `vseb_branching`, with the output cursor held as a
// one-hot set of lane masks and early exit as a `done` mask.
#[inline(always)]
fn vseb_masked<L: Lanes>(e: &[L], out: &mut [L]) {
    const MAX_OUT: usize = 8;
    let k = out.len();
    assert!(k <= MAX_OUT);
    let zero = L::splat(0.0);
    out.fill(zero);
    let mut at = [L::mask_none(); MAX_OUT];
    at[0] = L::mask_all();
    let mut done = L::mask_none();
    let mut eps = e[0];
    for &next in &e[1..] {
        let live = done.mask_andnot(L::mask_all());
        let t = fast_two_sum(eps, next);
        for m in 0..k {
            out[m] = L::select(at[m].mask_and(live), t.s, out[m]);
        }
        let nz = t.e.nonzero().mask_and(live);
        let full = at[k - 1];
        done = done.mask_or(nz.mask_and(full));
        let adv = full.mask_andnot(nz);
        eps = L::select(live, L::select(nz, t.e, t.s), eps);
        shift_cursor(&mut at[..k], adv);
    }
    let finish = done.mask_andnot(eps.nonzero());
    for m in 0..k {
        out[m] = L::select(at[m].mask_and(finish), eps, out[m]);
    }
}

// Moves the one-hot cursor one slot forward on lanes where `adv` is set.
// The last slot is sticky.
#[inline(always)]
fn shift_cursor<L: Lanes>(at: &mut [L], adv: L) {
    let k = at.len();
    for m in (1..k).rev() {
        let stay = if m == k - 1 {
            at[m]
        } else {
            adv.mask_andnot(at[m])
        };
        at[m] = stay.mask_or(at[m - 1].mask_and(adv));
    }
    at[0] = adv.mask_andnot(at[0]);
}

/// VecSumErrBranch producing `k` terms.
pub fn vseb(k: usize, e: &[f64]) -> Result<Vec<f64>> {
    if k == 0 || k > 8 {
        return Err(invalid(format!("vseb output count must be in 1..=8, got {k}")));
    }
    if e.len() < k {
        return Err(invalid(format!(
            "vseb({k}) needs at least {k} input terms, got {}",
            e.len()
        )));
    }
    let mut out = vec![0.0; k];
    vseb_into(e, &mut out);
    Ok(out)
}

/// Merges two magnitude-ordered triples into one ordering by non-increasing
/// `|.|`. Ties take the element of `x` first. Scalar on every lane.
#[inline(always)]
pub fn merge_by_magnitude<L: Lanes>(x: [L; 3], y: [L; 3]) -> [L; 6] {
    if L::WIDTH == 1 {
        let m = merge_scalar(
            [x[0].lane(0), x[1].lane(0), x[2].lane(0)],
            [y[0].lane(0), y[1].lane(0), y[2].lane(0)],
        );
        return m.map(L::splat);
    }
    // No closures around lane methods here or below: a closure body does not
    // inherit the caller's target features, so intrinsics in it are called
    // out of line.
    let mut xs = [[0.0; 4]; 3];
    let mut ys = [[0.0; 4]; 3];
    for i in 0..3 {
        xs[i] = x[i].to_array();
        ys[i] = y[i].to_array();
    }
    let mut lanes = [[0.0; 6]; 4];
    for (l, dst) in lanes.iter_mut().enumerate().take(L::WIDTH) {
        *dst = merge_scalar(
            [xs[0][l], xs[1][l], xs[2][l]],
            [ys[0][l], ys[1][l], ys[2][l]],
        );
    }
    let mut out = [L::splat(0.0); 6];
    for (p, o) in out.iter_mut().enumerate() {
        *o = L::from_fn(|l| lanes[l][p]);
    }
    out
}

#[inline(always)]
fn merge_scalar(x: [f64; 3], y: [f64; 3]) -> [f64; 6] {
    let mut out = [0.0; 6];
    let (mut i, mut j) = (0, 0);
    for slot in out.iter_mut() {
        let take_x = j == 3 || (i < 3 && x[i].abs() >= y[j].abs());
        if take_x {
            *slot = x[i];
            i += 1;
        } else {
            *slot = y[j];
            j += 1;
        }
    }
    out
}

/// Five-term to four-term renormalization (the QD library's `renorm`).
///
/// A backward FastTwoSum chain, then a forward pass that starts a new output
/// component only when a residual is nonzero.
#[inline(always)]
pub fn renorm5<L: Lanes>(c: [L; 5]) -> [L; 4] {
    let [c0, c1, c2, c3, c4] = c;
    let t = fast_two_sum(c3, c4);
    let (s, c4) = (t.s, t.e);
    let t = fast_two_sum(c2, s);
    let (s, c3) = (t.s, t.e);
    let t = fast_two_sum(c1, s);
    let (s, c2) = (t.s, t.e);
    let t = fast_two_sum(c0, s);
    let (c0, c1) = (t.s, t.e);
    if L::WIDTH == 1 {
        renorm_forward_branching(c0, [c1, c2, c3, c4])
    } else {
        renorm_forward_masked(c0, [c1, c2, c3, c4])
    }
}

#[inline(always)]
fn renorm_forward_branching<L: Lanes>(c0: L, tail: [L; 4]) -> [L; 4] {
    let zero = L::splat(0.0);
    let mut s = [c0, zero, zero, zero];
    let mut j = 0;
    for (step, &x) in tail.iter().enumerate() {
        if j == 3 {
            s[3] = s[3].add(x);
            continue;
        }
        let t = fast_two_sum(s[j], x);
        s[j] = t.s;
        s[j + 1] = t.e;
        if step < 3 && t.e.lane(0) != 0.0 {
            j += 1;
        }
    }
    s
}

#[inline(always)]
fn renorm_forward_masked<L: Lanes>(c0: L, tail: [L; 4]) -> [L; 4] {
    let zero = L::splat(0.0);
    let mut s = [zero; 4];
    let mut at = [L::mask_all(), L::mask_none(), L::mask_none(), L::mask_none()];
    // `acc` holds the open slot's value; slots are written when the cursor
    // leaves them and once more at the end.
    let mut acc = c0;
    for &x in &tail[..3] {
        let t = fast_two_sum(acc, x);
        // The last slot absorbs everything: its residual is dropped.
        let adv = at[3].mask_andnot(t.e.nonzero());
        for m in 0..3 {
            s[m] = L::select(at[m].mask_and(adv), t.s, s[m]);
        }
        acc = L::select(adv, t.e, t.s);
        shift_cursor(&mut at, adv);
    }
    // At slot 3 the plain sum is exactly FastTwoSum's rounded part.
    let t = fast_two_sum(acc, tail[3]);
    for m in 0..4 {
        s[m] = L::select(at[m], t.s, s[m]);
    }
    for m in 0..3 {
        s[m + 1] = L::select(at[m], t.e, s[m + 1]);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::DyadicReal;
    use crate::simd::LaneQuad;

    fn p2(k: i32) -> f64 {
        2f64.powi(k)
    }

    fn exact(c: &[f64]) -> DyadicReal {
        DyadicReal::from_components(c).unwrap()
    }

    #[test]
    fn two_sum_examples() {
        assert!(two_sum(1.5, 2.25).bits_eq(&SumPair::new(3.75, 0.0)));
        assert!(two_sum(1.0, p2(-53)).bits_eq(&SumPair::new(1.0, p2(-53))));
        assert!(two_sum(p2(53), 1.0).bits_eq(&SumPair::new(p2(53), 1.0)));
    }

    #[test]
    fn quick_two_sum_examples() {
        assert!(quick_two_sum(2.0, 1.0).bits_eq(&SumPair::new(3.0, 0.0)));
        assert!(quick_two_sum(1.0, p2(-53)).bits_eq(&SumPair::new(1.0, p2(-53))));
        assert!(quick_two_sum(0.0, 0.0).bits_eq(&SumPair::new(0.0, 0.0)));
    }

    #[test]
    #[cfg(debug_assertions)]
    #[should_panic(expected = "precondition")]
    fn quick_two_sum_checks_order_in_debug() {
        let _ = quick_two_sum(1.0, 4.0);
    }

    #[test]
    fn two_prod_examples() {
        assert!(two_prod(1.5, 2.0).bits_eq(&SumPair::new(3.0, 0.0)));
        let x = p2(27) + 1.0;
        let r = two_prod(x, x);
        assert!(r.bits_eq(&SumPair::new(p2(54) + p2(28), 1.0)));
        assert!(two_prod_split(x, x).bits_eq(&r));
        for v in [0.1, -7.25e100, 3e-200, 0.0] {
            assert!(two_prod(1.0, v).bits_eq(&SumPair::new(v, 0.0)));
        }
    }

    #[test]
    fn three_sum_examples() {
        assert_eq!(three_sum(1.0, 0.0, 0.0), (1.0, 0.0, 0.0));
        let (s, e1, e2) = three_sum(p2(53), 1.0, 1.0);
        assert_eq!(exact(&[s, e1, e2]), exact(&[p2(53), 2.0]));
        assert_eq!(three_sum(1.5, 2.25, 4.0), (7.75, 0.0, 0.0));
    }

    #[test]
    fn three_sum2_examples() {
        assert_eq!(three_sum2(1.0, 0.0, 0.0), (1.0, 0.0));
        assert_eq!(three_sum2(0.0, 0.0, 0.0), (0.0, 0.0));
        let (s, e) = three_sum2(p2(53), 1.0, 1.0);
        // The folded residual here is exact.
        assert_eq!(exact(&[s, e]), exact(&[p2(53), 2.0]));
    }

    #[test]
    fn vec_sum_examples() {
        assert_eq!(vec_sum(&[1.0, 0.0]).unwrap(), vec![1.0, 0.0]);
        let out = vec_sum(&[p2(-53), 1.0]).unwrap();
        assert_eq!(out, vec![1.0, p2(-53)]);
        assert!(vec_sum(&[1.0]).is_err());
        let six = [1.5, -p2(-60), p2(-110), 0.75, p2(-61), -p2(-112)];
        let out = vec_sum(&six).unwrap();
        assert_eq!(exact(&out), exact(&six));
    }

    #[test]
    fn vseb_examples() {
        let norm = [1.0, p2(-60), p2(-120)];
        assert_eq!(vseb(3, &norm).unwrap(), norm.to_vec());
        assert_eq!(vseb(3, &[0.0; 6]).unwrap(), vec![0.0; 3]);
        let out = vseb(3, &[1.0, p2(-60), 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(out, vec![1.0, p2(-60), 0.0]);
        assert!(vseb(0, &[1.0]).is_err());
        assert!(vseb(3, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn merge_examples() {
        let m = merge_by_magnitude([4.0, 2.0, 1.0], [8.0, 0.5, 0.25]);
        assert_eq!(m, [8.0, 4.0, 2.0, 1.0, 0.5, 0.25]);
        let m = merge_by_magnitude([3.0, 1.0, 0.5], [0.0; 3]);
        assert_eq!(m, [3.0, 1.0, 0.5, 0.0, 0.0, 0.0]);
        let m = merge_by_magnitude([2.0, 0.0, 0.0], [-2.0, 0.0, 0.0]);
        assert_eq!(m[0], 2.0);
        assert_eq!(m[1], -2.0);
    }

    #[test]
    fn renorm5_examples() {
        assert_eq!(renorm5([1.0, 0.0, 0.0, 0.0, 0.0]), [1.0, 0.0, 0.0, 0.0]);
        let norm = [1.0, p2(-60), p2(-120), p2(-180)];
        let out = renorm5([norm[0], norm[1], norm[2], norm[3], 0.0]);
        assert_eq!(out, norm);
    }

    fn masked_matches_branching(inputs: &[[f64; 6]], k: usize) {
        for chunk in inputs.chunks(4) {
            let mut quads = [LaneQuad::ZERO; 6];
            for (l, row) in chunk.iter().enumerate() {
                for p in 0..6 {
                    quads[p].0[l] = row[p];
                }
            }
            let mut packed = vec![LaneQuad::ZERO; k];
            vseb_into(&quads, &mut packed);
            for (l, row) in chunk.iter().enumerate() {
                let scalar = vseb(k, row).unwrap();
                for m in 0..k {
                    assert_eq!(packed[m].0[l].to_bits(), scalar[m].to_bits(), "{row:?} k={k}");
                }
            }
        }
    }

    #[test]
    fn vseb_masked_agrees_on_edge_patterns() {
        let z = 0.0;
        let cases = [
            [1.0, p2(-60), z, z, z, z],
            [z, z, z, z, z, z],
            [-0.0, z, -0.0, z, z, -0.0],
            [1.0, p2(-53), p2(-106), p2(-159), p2(-212), p2(-265)],
            [1.0, -1.0, 0.5, p2(-70), z, p2(-140)],
            [p2(-1000), z, z, z, z, 1.0],
            [3.0, z, p2(-52), z, p2(-105), z],
            [1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
        ];
        for k in 1..=6 {
            masked_matches_branching(&cases, k);
        }
    }
}
