use anyhow::Result;
use clap::{Parser, Subcommand};
use mpfkit::simd::check_environment;
use mpfkit::Backend;
use mpfkit_cli::{run_ewise_bench, run_matmul_bench, BenchArgs, BenchConfig};

#[derive(Parser)]
#[command(name = "mpfkit", version, about = "Multi-component floating-point benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Element-wise add and multiply throughput per kernel variant.
    Ewise(BenchArgs),
    /// Matrix-product timing, accuracy and digit loss.
    Matmul(BenchArgs),
    /// Print the detected backend and floating-point checks.
    Info,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Ewise(args) => {
            let cfg = BenchConfig::try_from(args)?;
            run_ewise_bench(&cfg)?.emit_csv(cfg.out.as_deref())
        }
        Command::Matmul(args) => {
            let cfg = BenchConfig::try_from(args)?;
            run_matmul_bench(&cfg)?.emit_csv(cfg.out.as_deref())
        }
        Command::Info => {
            check_environment()?;
            let hw = Backend::hardware().map_or("none", Backend::name);
            println!("hardware backend: {hw}");
            println!("active backend:   {}", Backend::active());
            println!("environment:      round-to-nearest-even, fused multiply-add ok");
            Ok(())
        }
    }
}
