pub mod bench;
pub mod pipeline;
pub mod synth;

/// An error carrying the pipeline stage that produced it; surfaces on stderr
/// with the stage tag and exit code 2.
#[derive(Debug)]
pub struct StageError {
    pub stage: &'static str,
    pub message: String,
}

impl StageError {
    pub fn new(stage: &'static str, err: impl std::fmt::Display) -> Self {
        Self {
            stage,
            message: err.to_string(),
        }
    }
}

pub type CmdResult = Result<(), StageError>;
