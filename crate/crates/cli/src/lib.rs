//! Benchmark driver for the mpfkit kernels: element-wise throughput,
//! matrix-product timing across algorithms and worker counts, and
//! digit-loss reports, all written as CSV.

pub mod config;
pub mod report;
pub mod runner;

pub use config::{BenchArgs, BenchConfig, Input};
pub use report::{BenchReport, Record};
pub use runner::{run_ewise_bench, run_matmul_bench};
