//! Element-wise and matrix-product benchmark drivers.

use std::hint::black_box;
use std::time::Instant;

use anyhow::{bail, ensure, Result};
use mpfkit::linalg::{ew_apply, ew_apply_into, gen_paper_matrices, matmul, matmul_strassen_parallel, EwOp};
use mpfkit::oracle::{
    digits_lost, max_rel_err, o_matmul, o_rel_err, DyadicMatrix, DyadicReal,
};
use mpfkit::{Algorithm, KernelVariant, MpMatrix, MpRng, Precision};

use crate::config::{BenchConfig, Input};
use crate::report::{BenchReport, Record};

/// Element-wise passes are repeated inside one timed sample until it covers
/// about this many operations, so short vectors still give stable timings.
pub const EWISE_OPS_PER_SAMPLE: usize = 1 << 18;

/// Worker count used for the determinism check before timing.
pub const CHECK_WORKERS: usize = 4;

/// Median wall-clock seconds of `reps` calls after one warm-up call.
pub fn time_median(reps: usize, mut f: impl FnMut()) -> f64 {
    f();
    let mut samples: Vec<f64> = (0..reps.max(1))
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed().as_secs_f64()
        })
        .collect();
    samples.sort_by(f64::total_cmp);
    let m = samples.len() / 2;
    if samples.len() % 2 == 1 {
        samples[m]
    } else {
        0.5 * (samples[m - 1] + samples[m])
    }
}

/// Element-wise operations reported for a precision. TD lists both
/// additions and both multiplications.
pub fn ewise_ops(p: Precision) -> &'static [(EwOp, &'static str)] {
    match p {
        Precision::TD => &[
            (EwOp::Add, "add_q"),
            (EwOp::TdAddMerge, "add_merge"),
            (EwOp::Mul, "mul"),
            (EwOp::TdMulQ, "mul_q"),
        ],
        _ => &[(EwOp::Add, "add"), (EwOp::Mul, "mul")],
    }
}

fn case_seed(seed: u64, p: Precision, n: usize) -> u64 {
    seed ^ ((n as u64) << 8) ^ p.width() as u64
}

fn exact_ew(op: EwOp, x: &DyadicReal, y: &DyadicReal) -> DyadicReal {
    match op {
        EwOp::Add | EwOp::TdAddMerge => x + y,
        EwOp::Sub => x - y,
        EwOp::Mul | EwOp::TdMulQ => x * y,
    }
}

fn ewise_error(op: EwOp, a: &MpMatrix, b: &MpMatrix, c: &MpMatrix) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for j in 0..a.cols() {
        let x = DyadicReal::from_components(&a.element(0, j))?;
        let y = DyadicReal::from_components(&b.element(0, j))?;
        worst = worst.max(o_rel_err(&c.element(0, j), &exact_ew(op, &x, &y))?);
    }
    Ok(worst)
}

/// Times every (precision, operation, size, variant) on seeded vectors of
/// positive values.
pub fn run_ewise_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let mut report = BenchReport::default();
    for &p in &cfg.precisions {
        for &n in &cfg.sizes {
            let mut rng = MpRng::new(case_seed(cfg.seed, p, n));
            let a = MpMatrix::random(p, 1, n, &mut rng);
            let b = MpMatrix::random(p, 1, n, &mut rng);
            let passes = EWISE_OPS_PER_SAMPLE.div_ceil(n);
            for &(op, name) in ewise_ops(p) {
                let reference = ew_apply(op, &a, &b, KernelVariant::Normal)?;
                let err = if n <= cfg.oracle_max {
                    Some(ewise_error(op, &a, &b, &reference)?)
                } else {
                    None
                };
                for &v in &cfg.variants {
                    let mut out = MpMatrix::zeros(p, 1, n);
                    ew_apply_into(op, &a, &b, &mut out, v)?;
                    ensure!(out.bits_eq(&reference), "{p} {name}: {v} differs from normal");
                    let secs = time_median(cfg.reps, || {
                        for _ in 0..passes {
                            ew_apply_into(op, black_box(&a), black_box(&b), &mut out, v)
                                .expect("operands validated above");
                            black_box(&out);
                        }
                    });
                    let op_count = (n * passes) as u64;
                    report.records.push(Record {
                        case_id: format!("ewise/{p}/{name}/{v}/n{n}"),
                        bench: "ewise",
                        precision: p.name(),
                        kind: name,
                        variant: v.name(),
                        n,
                        workers: 1,
                        op_count,
                        median_seconds: secs,
                        mflops: Record::mflops(op_count, secs),
                        max_rel_err: err,
                        digits_lost: err.map(|e| digits_lost(e, p.fmt_eps())),
                        fastest: false,
                    });
                }
            }
        }
    }
    report.mark_fastest();
    Ok(report)
}

/// Input matrices for one (precision, n) cell.
pub fn bench_matrices(cfg: &BenchConfig, p: Precision, n: usize) -> (MpMatrix, MpMatrix) {
    match cfg.input {
        Input::Paper => gen_paper_matrices(n, p),
        Input::Random => {
            let mut rng = MpRng::new(case_seed(cfg.seed, p, n));
            let a = MpMatrix::random(p, n, n, &mut rng);
            let b = MpMatrix::random(p, n, n, &mut rng);
            (a, b)
        }
    }
}

/// Exact product of the bench inputs. The structured `B` has identical
/// columns, so only its first column is multiplied.
pub fn bench_oracle(cfg: &BenchConfig, a: &MpMatrix, b: &MpMatrix) -> Result<DyadicMatrix> {
    let da = DyadicMatrix::from_mp(a)?;
    let mut db = DyadicMatrix::from_mp(b)?;
    if cfg.input == Input::Paper {
        db = db.leading_columns(1);
    }
    Ok(o_matmul(&da, &db, a.rows().max(a.cols()))?)
}

/// Multi-component operations of a classical `n x n` product.
pub fn classical_ops(n: usize) -> u64 {
    let n = n as u64;
    n * n * n + n * n * (n - 1)
}

fn product(cfg: &BenchConfig, algo: Algorithm, v: KernelVariant, a: &MpMatrix, b: &MpMatrix, w: usize) -> Result<MpMatrix> {
    Ok(matmul(algo, a, b, cfg.n_min, cfg.cutoff, v, w)?)
}

/// Times every (precision, n, algorithm, variant, workers) cell. Before
/// timing, each parallel algorithm is checked to give the serial result bit
/// for bit with [`CHECK_WORKERS`] workers.
pub fn run_matmul_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let mut report = BenchReport::default();
    for &p in &cfg.precisions {
        for &n in &cfg.sizes {
            let (a, b) = bench_matrices(cfg, p, n);
            let exact = if n <= cfg.oracle_max {
                Some(bench_oracle(cfg, &a, &b)?)
            } else {
                None
            };
            for &algo in &cfg.algorithms {
                for &v in &cfg.variants {
                    let serial = product(cfg, algo, v, &a, &b, 1)?;
                    if algo != Algorithm::Naive {
                        let par = product(cfg, algo, v, &a, &b, CHECK_WORKERS)?;
                        if !par.bits_eq(&serial) {
                            bail!("{p} {algo:?} {v} n={n}: {CHECK_WORKERS} workers differ from serial");
                        }
                    }
                    let err = exact.as_ref().map(|e| max_rel_err(&serial, e)).transpose()?;
                    let op_count = match algo {
                        Algorithm::Strassen => {
                            matmul_strassen_parallel(&a, &b, cfg.cutoff, cfg.n_min, v, 1)?.1.mpf_ops
                        }
                        _ => classical_ops(n),
                    };
                    // The naive product has no parallel form.
                    let workers: Vec<usize> = if algo == Algorithm::Naive {
                        vec![1]
                    } else {
                        cfg.workers.clone()
                    };
                    for w in workers {
                        let secs = time_median(cfg.reps, || {
                            black_box(product(cfg, algo, v, black_box(&a), black_box(&b), w).expect("validated"));
                        });
                        report.records.push(Record {
                            case_id: format!("matmul/{p}/{}/{v}/n{n}/w{w}", algo.name()),
                            bench: "matmul",
                            precision: p.name(),
                            kind: algo.name(),
                            variant: v.name(),
                            n,
                            workers: w,
                            op_count,
                            median_seconds: secs,
                            mflops: Record::mflops(op_count, secs),
                            max_rel_err: err,
                            digits_lost: err.map(|e| digits_lost(e, p.fmt_eps())),
                            fastest: false,
                        });
                    }
                }
            }
        }
    }
    report.mark_fastest();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> BenchConfig {
        BenchConfig {
            sizes: vec![5, 8],
            reps: 1,
            workers: vec![1, 2],
            n_min: 4,
            cutoff: 4,
            ..Default::default()
        }
    }

    #[test]
    fn median() {
        let mut calls = 0;
        let t = time_median(3, || calls += 1);
        assert_eq!(calls, 4);
        assert!(t >= 0.0);
    }

    #[test]
    fn op_counts() {
        assert_eq!(classical_ops(1), 1);
        assert_eq!(classical_ops(2), 12);
        assert_eq!(classical_ops(4), 64 + 48);
    }

    #[test]
    fn ewise_rows() {
        let rep = run_ewise_bench(&small()).unwrap();
        // (2 + 4 + 2) operations x 2 sizes x 3 variants.
        assert_eq!(rep.records.len(), 48);
        assert!(rep.find("ewise", "td", "add_q", "normal", 8).is_some());
        assert!(rep.find("ewise", "td", "add_merge", "loadstore", 8).is_some());
        for r in &rep.records {
            let e = r.max_rel_err.unwrap();
            assert!(e <= 2f64.powi(-100), "{}", r.case_id);
        }
    }

    #[test]
    fn matmul_rows_and_determinism() {
        let cfg = small();
        let rep = run_matmul_bench(&cfg).unwrap();
        // Per precision and size: naive 3 rows, block and strassen 3 x 2 each.
        assert_eq!(rep.records.len(), 3 * 2 * (3 + 6 + 6));
        let again = run_matmul_bench(&cfg).unwrap();
        for (x, y) in rep.records.iter().zip(&again.records) {
            assert_eq!((&x.case_id, x.op_count, x.max_rel_err), (&y.case_id, y.op_count, y.max_rel_err));
        }
        let s = rep.find("matmul", "qd", "strassen", "set", 8).unwrap();
        assert_eq!(s.op_count, matmul_strassen_parallel(
            &bench_matrices(&cfg, Precision::QD, 8).0,
            &bench_matrices(&cfg, Precision::QD, 8).1,
            4, 4, KernelVariant::SimdSet, 1,
        ).unwrap().1.mpf_ops);
        for r in &rep.records {
            assert!(r.digits_lost.unwrap() <= 2.0, "{}", r.case_id);
        }
    }
}
