//! Benchmark records and CSV output.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

/// One timed case. Timing columns are `median_seconds` and `mflops`; every
/// other column is a function of the configuration and seed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Record {
    pub case_id: String,
    pub bench: &'static str,
    pub precision: &'static str,
    /// Algorithm for matmul rows, operation for element-wise rows.
    pub kind: &'static str,
    pub variant: &'static str,
    pub n: usize,
    pub workers: usize,
    /// Multi-component operations per timed pass.
    pub op_count: u64,
    pub median_seconds: f64,
    pub mflops: f64,
    pub max_rel_err: Option<f64>,
    pub digits_lost: Option<f64>,
    /// Fastest case of its group, see [`BenchReport::mark_fastest`].
    pub fastest: bool,
}

impl Record {
    pub fn mflops(op_count: u64, seconds: f64) -> f64 {
        if seconds > 0.0 {
            op_count as f64 / (1e6 * seconds)
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BenchReport {
    pub records: Vec<Record>,
}

impl BenchReport {
    pub fn extend(&mut self, other: BenchReport) {
        self.records.extend(other.records);
    }

    /// Sets `fastest` on the minimum-time record of each group: per
    /// (precision, n) for products, per (precision, operation, n) for
    /// element-wise rows.
    pub fn mark_fastest(&mut self) {
        for r in &mut self.records {
            r.fastest = false;
        }
        type Group = (&'static str, &'static str, &'static str, usize);
        let mut best: Vec<(Group, usize)> = Vec::new();
        for (i, r) in self.records.iter().enumerate() {
            let kind = if r.bench == "ewise" { r.kind } else { "" };
            let key = (r.bench, r.precision, kind, r.n);
            match best.iter_mut().find(|g| g.0 == key) {
                Some(g) if self.records[g.1].median_seconds > r.median_seconds => g.1 = i,
                Some(_) => {}
                None => best.push((key, i)),
            }
        }
        for (_, i) in best {
            self.records[i].fastest = true;
        }
    }

    pub fn find(&self, bench: &str, precision: &str, kind: &str, variant: &str, n: usize) -> Option<&Record> {
        self.records
            .iter()
            .find(|r| r.bench == bench && r.precision == precision && r.kind == kind && r.variant == variant && r.n == n)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        wr.write_record(HEADER)?;
        for r in &self.records {
            wr.serialize(r)?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Writes the report to `path`, or to standard output when `None`.
    pub fn emit_csv(&self, path: Option<&Path>) -> Result<()> {
        match path {
            Some(p) => {
                let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
                self.write_csv(f).with_context(|| format!("writing {}", p.display()))
            }
            None => self.write_csv(std::io::stdout().lock()),
        }
    }
}

/// Column order of the CSV, matching the field order of [`Record`].
pub const HEADER: [&str; 13] = [
    "case_id",
    "bench",
    "precision",
    "kind",
    "variant",
    "n",
    "workers",
    "op_count",
    "median_seconds",
    "mflops",
    "max_rel_err",
    "digits_lost",
    "fastest",
];
