//! `jsmf pipeline`: corpus -> rectifier -> inference -> metrics -> files.
//!
//! The AP rectifier works on the dense matrix; ENN initializes from the
//! implicit operator through the randomized eigendecomposition and never
//! allocates N x N when paired with low-rank inference; PALM factorizes the
//! dense matrix directly.

use super::{CmdResult, StageError};
use crate::config::{FileConfig, Inference, Overrides, PipelineConfig, Rectifier};
use crate::manifest::{timed_stage, RunManifest, StageRecord};
use clap::Args;
use jsmf::cooc::{build_dense, build_implicit, DenseCooccurrence};
use jsmf::corpus::{curate_vocabulary, filter_short_documents, load_uci, BagOfWords};
use jsmf::infer::{aw, law, TopicModel};
use jsmf::linalg::{default_max_basis, randomized_eig, truncated_eig};
use jsmf::metrics::{topic_report, RectifiedSource, ReportOptions, TopicReport};
use jsmf::rectify::{ap_rectify, enn_rectify, palm_rectify, CompressedCooccurrence, SparseSym};
use jsmf::io;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    #[arg(long)]
    pub topics: usize,
    #[arg(long, value_enum)]
    pub rectifier: Option<Rectifier>,
    #[arg(long, value_enum)]
    pub inference: Option<Inference>,
    #[arg(long = "i-size")]
    pub i_size: Option<usize>,
    #[arg(long = "s")]
    pub s: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long = "max-iters")]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub oversampling: Option<usize>,
    #[arg(long = "power-iters")]
    pub power_iters: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "curate-vocab")]
    pub curate_vocab: Option<usize>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

enum Rectified {
    Dense(DenseCooccurrence),
    Compressed(CompressedCooccurrence),
}

pub fn run(args: &PipelineArgs) -> CmdResult {
    let file_config = match &args.config {
        Some(path) => FileConfig::load(path).map_err(|e| StageError::new("config", e))?,
        None => FileConfig::default(),
    };
    let config = PipelineConfig::resolve(
        args.topics,
        Overrides {
            rectifier: args.rectifier,
            inference: args.inference,
            i_size: args.i_size,
            s: args.s,
            gamma: args.gamma,
            tol: args.tol,
            max_iters: args.max_iters,
            oversampling: args.oversampling,
            power_iters: args.power_iters,
            seed: args.seed,
            curate_vocab: args.curate_vocab,
        },
        file_config,
    )
    .map_err(|e| StageError::new("config", e))?;

    std::fs::create_dir_all(&args.out).map_err(|e| StageError::new("io", e))?;
    let mut manifest = RunManifest::new("pipeline", config.clone());

    let corpus = timed_stage(&mut manifest.stages, "corpus", || {
        load_corpus(args, &config)
    })?;
    let k = config.topics;

    let (rectified, convergence_records) = run_rectifier(&mut manifest.stages, &corpus, &config)?;

    let model = timed_stage(&mut manifest.stages, "infer", || {
        run_inference(&rectified, k, &config)
    })?;
    if let Some(last) = manifest.stages.last_mut() {
        last.summary = format!(
            "anchors={:?} degenerate_rows={}",
            model.anchors.indices,
            model.degenerate_rows.len()
        );
    }

    let report = timed_stage(&mut manifest.stages, "metrics", || {
        let source = match &rectified {
            Rectified::Dense(c) => RectifiedSource::Dense(c),
            Rectified::Compressed(c) => RectifiedSource::Compressed(c),
        };
        let options = ReportOptions {
            word_list_len: config.top_words,
            mst_words: 7,
            dissimilarity_top: 20,
            num_random_hulls: config.num_random_hulls,
            seed: config.seed,
        };
        topic_report(source, &model, &options)
    })
    .map_err(|e| StageError::new("metrics", e))?;
    if let Some(last) = manifest.stages.last_mut() {
        last.summary = format!(
            "recovery={:.3e} approximation={:.3e} dominancy={:.3e}",
            report.relative_recovery, report.relative_approximation, report.relative_dominancy
        );
    }

    write_outputs(
        args,
        &mut manifest,
        &corpus,
        &rectified,
        &model,
        &report,
        convergence_records,
    )?;
    manifest
        .write(&args.out.join("manifest.json"))
        .map_err(|e| StageError::new("io", e))?;
    Ok(())
}

fn load_corpus(args: &PipelineArgs, config: &PipelineConfig) -> Result<BagOfWords, StageError> {
    let stage = "corpus";
    let docword = File::open(&args.input)
        .map_err(|e| StageError::new(stage, format!("{}: {e}", args.input.display())))?;
    let vocab = File::open(&args.vocab)
        .map_err(|e| StageError::new(stage, format!("{}: {e}", args.vocab.display())))?;
    let mut corpus = load_uci(BufReader::new(docword), BufReader::new(vocab))
        .map_err(|e| StageError::new(stage, e))?;
    if let Some(target) = config.curate_vocab {
        corpus = curate_vocabulary(&corpus, target).map_err(|e| StageError::new(stage, e))?;
    }
    filter_short_documents(&corpus).map_err(|e| StageError::new(stage, e))
}

type ConvergenceRecords = Vec<(usize, f64, usize, f64, f64)>;

fn run_rectifier(
    stages: &mut Vec<StageRecord>,
    corpus: &BagOfWords,
    config: &PipelineConfig,
) -> Result<(Rectified, ConvergenceRecords), StageError> {
    let k = config.topics;
    match config.rectifier {
        Rectifier::Ap => {
            let dense = timed_stage(stages, "cooc", || build_dense(corpus))
                .map_err(|e| StageError::new("cooc", e))?;
            let (out, report) = timed_stage(stages, "rectify", || {
                ap_rectify(&dense, k, config.max_iters, config.tol)
            })
            .map_err(|e| StageError::new("rectify", e))?;
            if let Some(last) = stages.last_mut() {
                last.summary = format!(
                    "iterations={} converged={} sum_dev={:.3e} psd_residual={:.3e}",
                    report.iterations, report.converged, report.sum_deviation, report.psd_residual
                );
            }
            let records = report
                .records
                .iter()
                .map(|r| (r.iteration, r.change, 0usize, 0.0, r.elapsed_seconds))
                .collect();
            Ok((Rectified::Dense(out), records))
        }
        Rectifier::Enn => {
            let implicit = timed_stage(stages, "cooc", || build_implicit(corpus))
                .map_err(|e| StageError::new("cooc", e))?;
            let init = timed_stage(stages, "init-eig", || {
                let view = jsmf::cooc::CoocView::Implicit(&implicit);
                randomized_eig(&view, k, config.oversampling, config.power_iters, config.seed)
            })
            .map_err(|e| StageError::new("init-eig", e))?;
            let (out, report) = timed_stage(stages, "rectify", || {
                enn_rectify(&init, k, config.i_size, config.max_iters, config.tol)
            })
            .map_err(|e| StageError::new("rectify", e))?;
            if let Some(last) = stages.last_mut() {
                last.summary = format!(
                    "iterations={} converged={} nnz={} epsilon={:.3e}",
                    report.iterations,
                    report.converged,
                    out.correction.nnz(),
                    out.epsilon_bound
                );
            }
            let records = report
                .records
                .iter()
                .map(|r| {
                    (
                        r.iteration,
                        r.residual,
                        r.nnz_correction,
                        r.shift,
                        r.elapsed_seconds,
                    )
                })
                .collect();
            Ok((Rectified::Compressed(out), records))
        }
        Rectifier::Palm => {
            let dense = timed_stage(stages, "cooc", || build_dense(corpus))
                .map_err(|e| StageError::new("cooc", e))?;
            let (out, state) = timed_stage(stages, "rectify", || {
                palm_rectify(&dense, k, config.s, config.gamma, config.max_iters, config.tol)
            })
            .map_err(|e| StageError::new("rectify", e))?;
            if let Some(last) = stages.last_mut() {
                last.summary = format!(
                    "iterations={} converged={} final_objective={:.6e}",
                    state.iterations,
                    state.converged,
                    state.objective_trace.last().copied().unwrap_or(f64::NAN)
                );
            }
            let records = state
                .objective_trace
                .iter()
                .enumerate()
                .map(|(i, &j)| (i + 1, j, 0usize, 0.0, f64::NAN))
                .collect();
            Ok((Rectified::Compressed(out), records))
        }
    }
}

fn run_inference(
    rectified: &Rectified,
    k: usize,
    config: &PipelineConfig,
) -> Result<TopicModel, StageError> {
    let stage = "infer";
    match (rectified, config.inference) {
        (Rectified::Dense(c), Inference::Aw) => aw(c, k).map_err(|e| StageError::new(stage, e)),
        (Rectified::Dense(c), Inference::Law) => {
            // factor the rectified matrix once and run the low-rank path
            let eig = truncated_eig(&jsmf::cooc::CoocView::Dense(c), k, 1e-9, default_max_basis(k))
                .map_err(|e| StageError::new(stage, e))?;
            let mut factor = eig.pair.basis;
            for (j, mut col) in factor.columns_mut().into_iter().enumerate() {
                let scale = eig.pair.eigenvalues[j].max(0.0).sqrt();
                col.mapv_inplace(|v| v * scale);
            }
            let n = factor.nrows();
            let compressed = CompressedCooccurrence {
                factor,
                correction: SparseSym::empty(n),
                shift: 0.0,
                epsilon_bound: 0.0,
            };
            law(&compressed, k).map_err(|e| StageError::new(stage, e))
        }
        (Rectified::Compressed(c), Inference::Law) => {
            law(c, k).map_err(|e| StageError::new(stage, e))
        }
        (Rectified::Compressed(c), Inference::Aw) => {
            // dense expansion on request only; clamps the epsilon dust
            let expanded = c.expand().mapv(|v| v.max(0.0));
            aw(&DenseCooccurrence::new(expanded), k).map_err(|e| StageError::new(stage, e))
        }
    }
}

fn write_outputs(
    args: &PipelineArgs,
    manifest: &mut RunManifest<PipelineConfig>,
    corpus: &BagOfWords,
    rectified: &Rectified,
    model: &TopicModel,
    report: &TopicReport,
    convergence: ConvergenceRecords,
) -> CmdResult {
    let out = &args.out;
    let write = timed_stage(&mut manifest.stages, "io", || -> CmdResult {
        let compressed = match rectified {
            Rectified::Compressed(c) => Some(c),
            Rectified::Dense(_) => None,
        };
        let files = io::write_topic_model(out, model, compressed, Some(corpus.vocab()))
            .map_err(|e| StageError::new("io", e))?;
        manifest.artifacts.extend(files);

        let report_path = out.join("report.txt");
        io::write_report(&report_path, report, Some(corpus.vocab()))
            .map_err(|e| StageError::new("io", e))?;
        manifest.artifacts.push(report_path);

        let conv_path = out.join("convergence.txt");
        io::write_convergence_records(&conv_path, convergence.iter().copied())
            .map_err(|e| StageError::new("io", e))?;
        manifest.artifacts.push(conv_path);
        Ok(())
    });
    write
}
