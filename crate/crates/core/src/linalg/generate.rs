use super::{with_format, MpMatrix};
use crate::mpf::{MpFormat, Precision};

/// The test matrices `A = [sqrt5 * (i + j - 1)]`, `B = [sqrt3 * (n - i)]`
/// (1-based), with `sqrt5` and `sqrt3` the binary64 roundings and each
/// element formed by one multiplication in the target format.
pub fn gen_paper_matrices(n: usize, precision: Precision) -> (MpMatrix, MpMatrix) {
    let r5 = 5f64.sqrt();
    let r3 = 3f64.sqrt();
    with_format!(precision, F => {
        let times = |r: f64, k: usize| -> F {
            F::from_padded(F::mul_lanes([r, 0.0, 0.0, 0.0], [k as f64, 0.0, 0.0, 0.0]))
        };
        let mut a = MpMatrix::zeros(precision, n, n);
        let mut b = MpMatrix::zeros(precision, n, n);
        for i in 1..=n {
            for j in 1..=n {
                a.put(i - 1, j - 1, times(r5, i + j - 1));
                b.put(i - 1, j - 1, times(r3, n - i));
            }
        }
        (a, b)
    })
}
