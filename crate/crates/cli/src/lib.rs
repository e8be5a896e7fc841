//! Batch runner for the `iclab` checks: configuration, suite orchestration
//! and report emission. The `iclab` binary is a thin wrapper around this.

#![forbid(unsafe_code)]

pub mod config;
pub mod emit;
pub mod registry;
pub mod runner;

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("i/o error at {path}: {msg}")]
    Io { path: PathBuf, msg: String },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, e: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.into(),
            msg: e.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        2
    }
}
