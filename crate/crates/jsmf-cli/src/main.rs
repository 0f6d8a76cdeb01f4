//! Command-line driver for the topic-inference pipeline.

mod alloc;
mod commands;
mod config;
mod manifest;

use clap::{Parser, Subcommand};

#[global_allocator]
static ALLOCATOR: alloc::TrackingAllocator = alloc::TrackingAllocator;

#[derive(Parser)]
#[command(name = "jsmf", version, about = "Spectral topic inference over word co-occurrence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus with planted anchors plus its ground truth.
    Synth(commands::synth::SynthArgs),
    /// Run corpus -> rectifier -> inference -> metrics and write all artifacts.
    Pipeline(commands::pipeline::PipelineArgs),
    /// Measure per-stage wall time and peak allocation over vocabulary sizes.
    Bench(commands::bench::BenchArgs),
}

fn main() {
    // JSMF_THREADS caps the rayon worker count
    if let Ok(threads) = std::env::var("JSMF_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }

    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Synth(args) => commands::synth::run(args),
        Command::Pipeline(args) => commands::pipeline::run(args),
        Command::Bench(args) => commands::bench::run(args),
    };
    if let Err(e) = result {
        eprintln!("error[stage={}]: {}", e.stage, e.message);
        std::process::exit(2);
    }
}
