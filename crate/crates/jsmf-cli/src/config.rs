//! Pipeline configuration with flag > config-file > default precedence. The
//! effective values are echoed verbatim into the run manifest so a run can be
//! reproduced from it.

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rectifier {
    Ap,
    Enn,
    Palm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Inference {
    Aw,
    Law,
}

/// Optional overrides loaded from a TOML config file; any field a flag does
/// not set falls back here, then to the defaults.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct FileConfig {
    pub rectifier: Option<Rectifier>,
    pub inference: Option<Inference>,
    pub i_size: Option<usize>,
    pub s: Option<f64>,
    pub gamma: Option<f64>,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub oversampling: Option<usize>,
    pub power_iters: Option<usize>,
    pub seed: Option<u64>,
    pub curate_vocab: Option<usize>,
    pub top_words: Option<usize>,
    pub num_random_hulls: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))
    }
}

/// Fully resolved configuration; everything the pipeline needs, validated.
#[derive(Debug, Clone, Serialize)]
pub struct PipelineConfig {
    pub topics: usize,
    pub rectifier: Rectifier,
    pub inference: Inference,
    pub i_size: usize,
    pub s: f64,
    pub gamma: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub oversampling: usize,
    pub power_iters: usize,
    pub seed: u64,
    pub curate_vocab: Option<usize>,
    pub top_words: usize,
    pub num_random_hulls: usize,
}

pub struct Overrides {
    pub rectifier: Option<Rectifier>,
    pub inference: Option<Inference>,
    pub i_size: Option<usize>,
    pub s: Option<f64>,
    pub gamma: Option<f64>,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub oversampling: Option<usize>,
    pub power_iters: Option<usize>,
    pub seed: Option<u64>,
    pub curate_vocab: Option<usize>,
}

impl PipelineConfig {
    pub fn resolve(topics: usize, flags: Overrides, file: FileConfig) -> Result<Self, String> {
        let rectifier = flags
            .rectifier
            .or(file.rectifier)
            .unwrap_or(Rectifier::Enn);
        let inference = flags.inference.or(file.inference).unwrap_or(match rectifier {
            Rectifier::Ap => Inference::Aw,
            _ => Inference::Law,
        });
        let (default_tol, default_iters) = match rectifier {
            Rectifier::Ap => (1e-6, 150),
            Rectifier::Enn => (1e-5, 100),
            Rectifier::Palm => (1e-5, 500),
        };
        let config = Self {
            topics,
            rectifier,
            inference,
            i_size: flags
                .i_size
                .or(file.i_size)
                .unwrap_or(10 * topics + 1000),
            s: flags.s.or(file.s).unwrap_or(1e-4),
            gamma: flags.gamma.or(file.gamma).unwrap_or(1.1),
            tol: flags.tol.or(file.tol).unwrap_or(default_tol),
            max_iters: flags.max_iters.or(file.max_iters).unwrap_or(default_iters),
            oversampling: flags.oversampling.or(file.oversampling).unwrap_or(10),
            power_iters: flags.power_iters.or(file.power_iters).unwrap_or(2),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            curate_vocab: flags.curate_vocab.or(file.curate_vocab),
            top_words: file.top_words.unwrap_or(7),
            num_random_hulls: file.num_random_hulls.unwrap_or(10),
        };
        config.validate()?;
        Ok(config)
    }

    /// Every field is checked against the owning stage's preconditions here,
    /// before any stage runs.
    pub fn validate(&self) -> Result<(), String> {
        if self.topics == 0 {
            return Err("topics must be positive".into());
        }
        if self.i_size == 0 {
            return Err("i-size must be positive".into());
        }
        if !(self.s > 0.0) {
            return Err(format!("s must be positive, got {}", self.s));
        }
        if !(self.gamma > 1.0) {
            return Err(format!("gamma must exceed 1, got {}", self.gamma));
        }
        if !(self.tol > 0.0) {
            return Err(format!("tol must be positive, got {}", self.tol));
        }
        if self.max_iters == 0 {
            return Err("max-iters must be positive".into());
        }
        if self.curate_vocab == Some(0) {
            return Err("curate-vocab must be positive".into());
        }
        if self.top_words == 0 {
            return Err("top_words must be positive".into());
        }
        Ok(())
    }
}
