use glbm_core::GlbmError;
use thiserror::Error;

/// Harness failures, grouped by how the CLI reports them.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error(transparent)]
    Core(#[from] GlbmError),

    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{failed} of {total} trials failed numerically in {phase}")]
    NumericalFailure { phase: String, failed: usize, total: usize },
}
