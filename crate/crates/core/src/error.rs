use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the forward model or the inversion pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),

    #[error("guided-root bracket without sign change ({parity}, interval {index}): {detail}")]
    RootBracket {
        parity: &'static str,
        index: usize,
        detail: String,
    },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("frequency k = {k} is resonant for {what}")]
    Resonant { k: f64, what: &'static str },

    #[error("no resonance peak found: {0}")]
    NoPeak(String),

    #[error("peak window not covered: {0}")]
    WindowNotCovered(String),

    #[error("degenerate calibration design: {0}")]
    DegenerateDesign(String),

    #[error("division guard tripped: {0}")]
    DivisionGuard(String),

    #[error("frequency {k} not available in measurement set (nearest {nearest})")]
    MissingFrequency { k: f64, nearest: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("schema error in {path}: {detail}")]
    Schema { path: PathBuf, detail: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }

    pub(crate) fn schema(path: impl Into<PathBuf>, detail: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps the error with a pipeline stage label.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Stage label of the outermost wrapper, if any.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
