//! `jsmf bench`: wall time and peak allocation per stage over a list of
//! vocabulary sizes, written as CSV with the fixed schema
//! `n,k,stage,seconds,peak_bytes`.

use super::{CmdResult, StageError};
use crate::alloc;
use clap::Args;
use jsmf::cooc::{build_dense, build_implicit, CoocView};
use jsmf::corpus::{generate_synthetic, SyntheticSpec};
use jsmf::infer::law;
use jsmf::io::write_atomic;
use jsmf::linalg::randomized_eig;
use jsmf::rectify::{ap_rectify, enn_rectify};
use std::path::PathBuf;
use std::time::Instant;

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated vocabulary sizes.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
    #[arg(long)]
    pub topics: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also measure the dense alternating-projection baseline.
    #[arg(long = "with-ap", default_value_t = false)]
    pub with_ap: bool,
    /// Rectifier iterations to time per size.
    #[arg(long = "bench-iters", default_value_t = 3)]
    pub bench_iters: usize,
    #[arg(long)]
    pub out: PathBuf,
}

struct Row {
    n: usize,
    k: usize,
    stage: &'static str,
    seconds: f64,
    peak_bytes: u64,
}

fn measure<T>(rows: &mut Vec<Row>, n: usize, k: usize, stage: &'static str, body: impl FnOnce() -> T) -> T {
    alloc::reset_peak();
    let start = Instant::now();
    let out = body();
    rows.push(Row {
        n,
        k,
        stage,
        seconds: start.elapsed().as_secs_f64(),
        peak_bytes: alloc::peak_bytes() as u64,
    });
    out
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values[values.len() / 2]
}

pub fn run(args: &BenchArgs) -> CmdResult {
    if args.sizes.is_empty() {
        return Err(StageError::new("config", "at least one size required"));
    }
    let k = args.topics;
    let mut rows = Vec::new();

    for &n in &args.sizes {
        let spec = SyntheticSpec {
            vocab_size: n,
            topics: k,
            docs: 2 * n,
            doc_length: 50,
            dirichlet_doc: 0.3,
            anchor_mass: 0.35,
            seed: args.seed,
        };
        let corpus = measure(&mut rows, n, k, "synth", || generate_synthetic(&spec))
            .map_err(|e| StageError::new("synth", e))?
            .0;

        let implicit = measure(&mut rows, n, k, "cooc", || build_implicit(&corpus))
            .map_err(|e| StageError::new("cooc", e))?;
        let init = measure(&mut rows, n, k, "randeig", || {
            randomized_eig(&CoocView::Implicit(&implicit), k, 10, 2, args.seed)
        })
        .map_err(|e| StageError::new("init-eig", e))?;

        // tol = 0 forces exactly bench_iters rectification cycles
        let i_size = 10 * k + 1000;
        let enn = measure(&mut rows, n, k, "enn", || {
            enn_rectify(&init, k, i_size, args.bench_iters, 0.0)
        })
        .map_err(|e| StageError::new("rectify", e))?;
        let (compressed, report) = enn;
        let diffs: Vec<f64> = report
            .records
            .windows(2)
            .map(|w| w[1].elapsed_seconds - w[0].elapsed_seconds)
            .collect();
        if !diffs.is_empty() {
            rows.push(Row {
                n,
                k,
                stage: "enn_iter",
                seconds: median(diffs),
                peak_bytes: 0,
            });
        }

        measure(&mut rows, n, k, "law", || law(&compressed, k))
            .map_err(|e| StageError::new("infer", e))?;

        if args.with_ap {
            let dense = measure(&mut rows, n, k, "cooc_dense", || build_dense(&corpus))
                .map_err(|e| StageError::new("cooc", e))?;
            let (_, ap_report) = measure(&mut rows, n, k, "ap", || {
                ap_rectify(&dense, k, 2, 0.0)
            })
            .map_err(|e| StageError::new("rectify", e))?;
            let per_iter = match ap_report.records.as_slice() {
                [first] => first.elapsed_seconds,
                [.., a, b] => b.elapsed_seconds - a.elapsed_seconds,
                [] => f64::NAN,
            };
            rows.push(Row {
                n,
                k,
                stage: "ap_iter",
                seconds: per_iter,
                peak_bytes: 0,
            });
        }
    }

    write_atomic(&args.out, |w| {
        writeln!(w, "n,k,stage,seconds,peak_bytes")?;
        for row in &rows {
            writeln!(
                w,
                "{},{},{},{:.9},{}",
                row.n, row.k, row.stage, row.seconds, row.peak_bytes
            )?;
        }
        Ok(())
    })
    .map_err(|e| StageError::new("io", e))
}
