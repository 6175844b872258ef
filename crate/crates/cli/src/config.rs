//! Command-line options and the validated benchmark configuration.

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::Args;
use mpfkit::linalg::{DEFAULT_CUTOFF, DEFAULT_N_MIN};
use mpfkit::{Algorithm, KernelVariant, Precision};

/// Matrix sizes of the large timing tables, opt-in through `--paper-sizes`.
pub const PAPER_SIZES: [usize; 6] = [1023, 1024, 1025, 4095, 4096, 4097];
pub const DEFAULT_SIZES: [usize; 5] = [64, 128, 256, 512, 1024];
pub const DEFAULT_ORACLE_MAX: usize = 64;

#[derive(Args, Debug, Clone)]
pub struct BenchArgs {
    /// dd, td, qd or all (comma-separated lists allowed).
    #[arg(long, default_value = "all")]
    pub precision: String,

    /// naive, block, strassen or all. Ignored by the element-wise bench.
    #[arg(long, default_value = "all")]
    pub algo: String,

    /// normal, set, loadstore or all.
    #[arg(long, default_value = "all")]
    pub variant: String,

    /// Comma-separated problem sizes (matrix order or vector length).
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,

    /// Use the 1023..4097 sizes of the large timing tables.
    #[arg(long, conflicts_with = "sizes")]
    pub paper_sizes: bool,

    /// Block size of the blocked product.
    #[arg(long = "nmin", default_value_t = DEFAULT_N_MIN)]
    pub n_min: usize,

    /// Largest dimension handed from Strassen to the blocked product.
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    pub cutoff: usize,

    /// Comma-separated worker counts.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub workers: Vec<usize>,

    /// Timed repetitions per case, after one warm-up pass.
    #[arg(long, default_value_t = 5)]
    pub reps: usize,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Largest n checked against the exact oracle.
    #[arg(long, default_value_t = DEFAULT_ORACLE_MAX)]
    pub oracle_max: usize,

    /// CSV output path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Structured sqrt5/sqrt3 matrices (the default for matmul).
    #[arg(long, conflicts_with = "random")]
    pub paper_matrices: bool,

    /// Seeded random matrices.
    #[arg(long)]
    pub random: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Input {
    Paper,
    Random,
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub precisions: Vec<Precision>,
    pub algorithms: Vec<Algorithm>,
    pub variants: Vec<KernelVariant>,
    pub sizes: Vec<usize>,
    pub n_min: usize,
    pub cutoff: usize,
    pub workers: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub oracle_max: usize,
    pub out: Option<PathBuf>,
    pub input: Input,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            precisions: Precision::ALL.to_vec(),
            algorithms: Algorithm::ALL.to_vec(),
            variants: KernelVariant::ALL.to_vec(),
            sizes: DEFAULT_SIZES.to_vec(),
            n_min: DEFAULT_N_MIN,
            cutoff: DEFAULT_CUTOFF,
            workers: vec![1],
            reps: 5,
            seed: 1,
            oracle_max: DEFAULT_ORACLE_MAX,
            out: None,
            input: Input::Paper,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        let nonempty = [
            ("precision", self.precisions.is_empty()),
            ("algo", self.algorithms.is_empty()),
            ("variant", self.variants.is_empty()),
            ("sizes", self.sizes.is_empty()),
            ("workers", self.workers.is_empty()),
        ];
        for (name, empty) in nonempty {
            if empty {
                bail!("--{name} selects nothing");
            }
        }
        if self.sizes.contains(&0) {
            bail!("sizes must be at least 1");
        }
        if self.workers.contains(&0) {
            bail!("worker counts must be at least 1");
        }
        if self.reps == 0 {
            bail!("--reps must be at least 1");
        }
        if self.n_min == 0 || self.cutoff == 0 {
            bail!("--nmin and --cutoff must be at least 1");
        }
        Ok(())
    }
}

impl TryFrom<BenchArgs> for BenchConfig {
    type Error = anyhow::Error;

    fn try_from(a: BenchArgs) -> Result<Self> {
        let sizes = match (a.sizes, a.paper_sizes) {
            (Some(s), _) => s,
            (None, true) => PAPER_SIZES.to_vec(),
            (None, false) => DEFAULT_SIZES.to_vec(),
        };
        let cfg = BenchConfig {
            precisions: parse_set(&a.precision, &Precision::ALL).context("--precision")?,
            algorithms: parse_set(&a.algo, &Algorithm::ALL).context("--algo")?,
            variants: parse_set(&a.variant, &KernelVariant::ALL).context("--variant")?,
            sizes,
            n_min: a.n_min,
            cutoff: a.cutoff,
            workers: a.workers,
            reps: a.reps,
            seed: a.seed,
            oracle_max: a.oracle_max,
            out: a.out,
            input: if a.random { Input::Random } else { Input::Paper },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `all` or a comma-separated list, dropping duplicates.
pub fn parse_set<T>(s: &str, all: &[T]) -> Result<Vec<T>>
where
    T: FromStr + Copy + PartialEq,
    T::Err: std::error::Error + Send + Sync + 'static,
{
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim) {
        if part.eq_ignore_ascii_case("all") {
            out.extend_from_slice(all);
            continue;
        }
        out.push(part.parse::<T>().with_context(|| format!("bad value {part:?}"))?);
    }
    let mut unique = Vec::with_capacity(out.len());
    for v in out {
        if !unique.contains(&v) {
            unique.push(v);
        }
    }
    Ok(unique)
}
