use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use mpfkit::linalg::{ew_apply_into, EwOp};
use mpfkit::{KernelVariant, MpMatrix, MpRng, Precision};

const LEN: usize = 4096;

fn ewise(c: &mut Criterion) {
    let mut rng = MpRng::new(1);
    for p in Precision::ALL {
        let a = MpMatrix::random(p, 1, LEN, &mut rng);
        let b = MpMatrix::random(p, 1, LEN, &mut rng);
        let mut out = MpMatrix::zeros(p, 1, LEN);
        let ops: &[EwOp] = match p {
            Precision::TD => &[EwOp::Add, EwOp::TdAddMerge, EwOp::Mul, EwOp::TdMulQ],
            _ => &[EwOp::Add, EwOp::Mul],
        };
        for &op in ops {
            let mut g = c.benchmark_group(format!("ewise/{p}/{}", op.name()));
            g.throughput(Throughput::Elements(LEN as u64));
            for v in KernelVariant::ALL {
                g.bench_function(BenchmarkId::from_parameter(v), |bch| {
                    bch.iter(|| ew_apply_into(op, &a, &b, &mut out, v).unwrap())
                });
            }
            g.finish();
        }
    }
}

criterion_group!(benches, ewise);
criterion_main!(benches);
