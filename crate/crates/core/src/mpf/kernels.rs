//! Addition and multiplication algorithms on component arrays.
//!
//! Component `k` of a multi-component number is element `k` of the array;
//! with a four-lane `L`, each array holds four independent numbers. All
//! results are normalized when the inputs are.

use crate::eft::{
    fast_two_sum, merge_by_magnitude, renorm5, three_sum, three_sum2, two_prod, two_sum,
    vec_sum_in_place, vseb_into,
};
use crate::simd::Lanes;

#[inline(always)]
pub fn neg<L: Lanes, const N: usize>(mut x: [L; N]) -> [L; N] {
    for c in &mut x {
        *c = c.neg();
    }
    x
}

#[inline(always)]
pub fn dd_add<L: Lanes>(x: [L; 2], y: [L; 2]) -> [L; 2] {
    let t = two_sum(x[0], y[0]);
    let w = x[1].add(y[1]);
    let e = t.e.add(w);
    let r = fast_two_sum(t.s, e);
    [r.s, r.e]
}

#[inline(always)]
pub fn dd_mul<L: Lanes>(x: [L; 2], y: [L; 2]) -> [L; 2] {
    let p = two_prod(x[0], y[0]);
    let w1 = x[0].mul(y[1]);
    let w2 = x[1].mul(y[0]);
    let w3 = w1.add(w2);
    let p2 = p.e.add(w3);
    let r = fast_two_sum(p.s, p2);
    [r.s, r.e]
}

/// Triple-double addition by magnitude merge, VecSum and VSEB(3).
#[inline(always)]
pub fn td_add_merge<L: Lanes>(x: [L; 3], y: [L; 3]) -> [L; 3] {
    let mut z = merge_by_magnitude(x, y);
    vec_sum_in_place(&mut z);
    let mut r = [L::splat(0.0); 3];
    vseb_into(&z, &mut r);
    r
}

/// Triple-double addition through [`qd_add`] with zero fourth components;
/// the fourth result component is dropped.
#[inline(always)]
pub fn td_add_q<L: Lanes>(x: [L; 3], y: [L; 3]) -> [L; 3] {
    let r = qd_add(extend(x), extend(y));
    [r[0], r[1], r[2]]
}

/// The "fast" triple-double product.
#[inline(always)]
pub fn td_mul<L: Lanes>(x: [L; 3], y: [L; 3]) -> [L; 3] {
    let z00 = two_prod(x[0], y[0]);
    let z01 = two_prod(x[0], y[1]);
    let z10 = two_prod(x[1], y[0]);
    let mut b = [z00.e, z01.s, z10.s];
    vec_sum_in_place(&mut b);
    let c = x[1].mul_add(y[1], b[2]);
    let z31 = x[0].mul_add(y[2], z10.e);
    let z32 = x[2].mul_add(y[0], z01.e);
    let z3 = z31.add(z32);
    let s3 = c.add(z3);
    let mut e = [z00.s, b[0], b[1], s3];
    vec_sum_in_place(&mut e);
    let mut tail = [L::splat(0.0); 2];
    vseb_into(&e[1..], &mut tail);
    [e[0], tail[0], tail[1]]
}

/// Triple-double product through [`qd_mul`]; kept for comparison with
/// [`td_mul`], which is the default.
#[inline(always)]
pub fn td_mul_q<L: Lanes>(x: [L; 3], y: [L; 3]) -> [L; 3] {
    let r = qd_mul(extend(x), extend(y));
    [r[0], r[1], r[2]]
}

#[inline(always)]
fn extend<L: Lanes>(x: [L; 3]) -> [L; 4] {
    [x[0], x[1], x[2], L::splat(0.0)]
}

/// Sloppy quad-double addition.
#[inline(always)]
pub fn qd_add<L: Lanes>(x: [L; 4], y: [L; 4]) -> [L; 4] {
    let a0 = two_sum(x[0], y[0]);
    let a1 = two_sum(x[1], y[1]);
    let a2 = two_sum(x[2], y[2]);
    let a3 = two_sum(x[3], y[3]);
    let (s0, t0, t1, t2, t3) = (a0.s, a0.e, a1.e, a2.e, a3.e);

    let r = two_sum(a1.s, t0);
    let (s1, t0) = (r.s, r.e);
    let (s2, t0, t1) = three_sum(a2.s, t0, t1);
    let (s3, t0) = three_sum2(a3.s, t0, t2);
    // t3 is the residual of the fourth componentwise sum.
    let t0 = t0.add(t1).add(t3);
    renorm5([s0, s1, s2, s3, t0])
}

/// Sloppy quad-double multiplication.
///
/// Folds that combine a term with its mirror image (`x_i y_j` and `x_j y_i`)
/// pair the mirrored terms first, so the result is bitwise symmetric in the
/// operands.
#[inline(always)]
pub fn qd_mul<L: Lanes>(x: [L; 4], y: [L; 4]) -> [L; 4] {
    let r0 = two_prod(x[0], y[0]);
    let r1 = two_prod(x[0], y[1]);
    let r2 = two_prod(x[1], y[0]);
    let r3 = two_prod(x[0], y[2]);
    let r4 = two_prod(x[1], y[1]);
    let r5 = two_prod(x[2], y[0]);
    let p0 = r0.s;
    let (q0, q1, q2, q3, q4, q5) = (r0.e, r1.e, r2.e, r3.e, r4.e, r5.e);

    let (p1, p2, q0) = three_sum(r1.s, r2.s, q0);
    let (p2, q1, q2) = three_sum(q1, q2, p2);
    let (p3, p4, p5) = three_sum(r3.s, r5.s, r4.s);

    let u = two_sum(p2, p3);
    let (s0, t0) = (u.s, u.e);
    let u = two_sum(q1, p4);
    let (s1, t1) = (u.s, u.e);
    let s2 = q2.add(p5);
    let u = two_sum(s1, t0);
    let (s1, t0) = (u.s, u.e);
    let s2 = s2.add(t0.add(t1));

    let s1 = s1.add(x[0].mul(y[3]).add(x[3].mul(y[0])));
    let s1 = s1.add(x[1].mul(y[2]).add(x[2].mul(y[1])));
    let s1 = s1.add(q0);
    let s1 = s1.add(q3.add(q5));
    let s1 = s1.add(q4);
    renorm5([p0, p1, s0, s1, s2])
}
