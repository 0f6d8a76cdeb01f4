//! `jsmf synth`: writes a synthetic UCI-format corpus with its ground-truth
//! model.

use super::{CmdResult, StageError};
use crate::manifest::{timed_stage, RunManifest};
use clap::Args;
use jsmf::corpus::{generate_synthetic, SyntheticSpec};
use jsmf::io;
use serde::Serialize;
use std::path::PathBuf;

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long = "vocab-size")]
    pub vocab_size: usize,
    #[arg(long)]
    pub topics: usize,
    #[arg(long)]
    pub docs: usize,
    #[arg(long = "doc-length", default_value_t = 50)]
    pub doc_length: usize,
    #[arg(long = "dirichlet-doc", default_value_t = 0.3)]
    pub dirichlet_doc: f64,
    #[arg(long = "anchor-mass", default_value_t = 0.35)]
    pub anchor_mass: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct SpecEcho {
    vocab_size: usize,
    topics: usize,
    docs: usize,
    doc_length: usize,
    dirichlet_doc: f64,
    anchor_mass: f64,
    seed: u64,
}

pub fn run(args: &SynthArgs) -> CmdResult {
    let spec = SyntheticSpec {
        vocab_size: args.vocab_size,
        topics: args.topics,
        docs: args.docs,
        doc_length: args.doc_length,
        dirichlet_doc: args.dirichlet_doc,
        anchor_mass: args.anchor_mass,
        seed: args.seed,
    };
    let truth_dir = args.out.join("truth");
    std::fs::create_dir_all(&truth_dir).map_err(|e| StageError::new("io", e))?;

    let mut manifest = RunManifest::new(
        "synth",
        SpecEcho {
            vocab_size: spec.vocab_size,
            topics: spec.topics,
            docs: spec.docs,
            doc_length: spec.doc_length,
            dirichlet_doc: spec.dirichlet_doc,
            anchor_mass: spec.anchor_mass,
            seed: spec.seed,
        },
    );

    let generated = timed_stage(&mut manifest.stages, "synth", || generate_synthetic(&spec));
    let (corpus, truth) = generated.map_err(|e| StageError::new("synth", e))?;

    let docword = args.out.join("docword.txt");
    let vocab = args.out.join("vocab.txt");
    let write = timed_stage(&mut manifest.stages, "io", || -> Result<(), StageError> {
        io::write_uci(&docword, &vocab, &corpus).map_err(|e| StageError::new("io", e))?;
        let truth_files = io::write_topic_model(&truth_dir, &truth, None, Some(corpus.vocab()))
            .map_err(|e| StageError::new("io", e))?;
        manifest.artifacts.extend(truth_files);
        Ok(())
    });
    write?;
    manifest.artifacts.push(docword);
    manifest.artifacts.push(vocab);

    manifest
        .write(&args.out.join("manifest.json"))
        .map_err(|e| StageError::new("io", e))?;
    Ok(())
}
