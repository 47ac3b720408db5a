//! Crate-wide error type.
//!
//! Every fallible operation in the library returns [`Result`]. Configuration
//! problems are reported eagerly (at construction/validation time) so that
//! long simulation runs fail before any signal processing starts.

/// Error type shared by all modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter or combination of parameters is outside its valid domain.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Two buffers that must agree in length (or dimension) do not.
    #[error("size mismatch in {context}: expected {expected}, got {actual}")]
    SizeMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    /// Filter-bank calibration could not meet its targets.
    #[error("calibration failed: {0}")]
    FitFailure(String),

    /// Frame synchronization did not find a credible training sequence.
    #[error("frame synchronization failed: {0}")]
    SyncFailure(String),

    /// Timing recovery lost lock or found no timing tone.
    #[error("timing recovery failed: {0}")]
    TimingFailure(String),

    /// A serialized artifact (config file, alist, report) could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// A scenario pipeline stage failed; wraps the underlying error with the
    /// stage name so sweep logs identify where a point died.
    #[error("stage '{stage}' failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    /// File I/O failure (dumps, reports, config files).
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Wrap an error with the name of the pipeline stage it occurred in.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
