//! Study pipeline and per-stage commands on top of `vecmkit`.

pub mod commands;
pub mod config;
pub mod pipeline;
pub mod report;

pub use config::{OutputFormat, PipelineConfig};
pub use pipeline::{run_pipeline, STAGES};
pub use report::{emit_report, StudyReport, Table};

/// Error tagged with the stage that raised it.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("[{stage}] {message}")]
pub struct CliError {
    pub stage: String,
    pub message: String,
}

impl CliError {
    pub fn new(stage: impl Into<String>, message: impl Into<String>) -> Self {
        CliError {
            stage: stage.into(),
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        CliError::new("config", message)
    }

    /// Wraps a library error under `stage`.
    pub fn at(stage: &str) -> impl Fn(vecmkit::Error) -> CliError + '_ {
        move |e| CliError::new(stage, e.to_string())
    }
}
