//! Run manifest: the configuration snapshot, stage timings, convergence
//! summaries, and artifact paths of one invocation.

use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize)]
pub struct StageRecord {
    pub name: String,
    pub seconds: f64,
    pub peak_bytes: u64,
    pub summary: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest<C: Serialize> {
    pub tool_version: &'static str,
    pub command: String,
    pub config: C,
    pub stages: Vec<StageRecord>,
    pub artifacts: Vec<PathBuf>,
}

impl<C: Serialize> RunManifest<C> {
    pub fn new(command: &str, config: C) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config,
            stages: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), String> {
        let json = serde_json::to_string_pretty(self).map_err(|e| e.to_string())?;
        jsmf::io::write_atomic(path, |w| w.write_all(json.as_bytes()))
            .map_err(|e| e.to_string())
    }
}

/// Runs one stage, recording wall time and peak live heap.
pub fn timed_stage<T>(
    stages: &mut Vec<StageRecord>,
    name: &str,
    body: impl FnOnce() -> T,
) -> T {
    crate::alloc::reset_peak();
    let start = std::time::Instant::now();
    let out = body();
    stages.push(StageRecord {
        name: name.to_string(),
        seconds: start.elapsed().as_secs_f64(),
        peak_bytes: crate::alloc::peak_bytes() as u64,
        summary: String::new(),
    });
    out
}
