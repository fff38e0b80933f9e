use std::fmt;

use thiserror::Error;

/// Failure categories shared by every builder, solver and analysis routine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("outside the domain: {0}")]
    Domain(String),

    #[error("site range {requested} not contained in window {window}")]
    OutOfRange { requested: String, window: String },

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("graph structure: {0}")]
    Structural(String),

    #[error("resource limit: {reason}{}", best_window.map(|k| format!(" (largest window tried K={k})")).unwrap_or_default())]
    Resource {
        reason: String,
        best_window: Option<usize>,
    },

    #[error("exact arithmetic overflow: {0}")]
    Size(String),

    #[error("bad data: {0}")]
    Data(String),

    #[error("empty range: {0}")]
    Range(String),

    #[error("clustering: {0}")]
    Clustering(String),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("environment seed {seed}: {source}")]
    Member {
        seed: u64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl fmt::Display) -> Self {
        Error::Parameter {
            name,
            reason: reason.to_string(),
        }
    }

    pub(crate) fn parse(line: usize, reason: impl fmt::Display) -> Self {
        Error::Parse {
            line,
            reason: reason.to_string(),
        }
    }

    /// True for errors caused by hitting a size or window budget.
    pub fn is_resource(&self) -> bool {
        match self {
            Error::Resource { .. } | Error::Size(_) => true,
            Error::Member { source, .. } => source.is_resource(),
            _ => false,
        }
    }
}
