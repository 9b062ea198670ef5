use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("schema error at `{field}`: {message}")]
    Schema { field: String, message: String },
    #[error("invariant violated ({invariant}): {detail}")]
    Invariant { invariant: String, detail: String },
}

impl ScenarioError {
    pub(crate) fn invariant(invariant: &str, detail: impl Into<String>) -> Self {
        ScenarioError::Invariant {
            invariant: invariant.to_string(),
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum KinematicsError {
    #[error("surface parameter {0} outside [0, 1]")]
    SurfaceParam(f64),
}
