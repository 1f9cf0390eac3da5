//! Batch orchestration behind the command-line tool: configuration, run
//! directories with replay metadata, per-point checkpoints and the
//! experiment commands.

mod commands;
mod config;

pub use commands::{run_census, run_evolve, run_gamma_scan, run_resonances, run_retention, run_sweep};
pub use config::{
    split_seed, CensusConfig, EngineConfig, ExperimentConfig, GammaConfig, MitigationConfig, ModelConfig, NoiseConfig, RetentionConfig,
    SweepConfig,
};

use crate::error::{EngineError, FitError};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_ENGINE: i32 = 4;
pub const EXIT_NUMERICAL: i32 = 5;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("i/o on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error("{failed} of {total} points failed (see failures.txt)")]
    PartialFailure { failed: usize, total: usize, numerical: bool },
}

impl HarnessError {
    pub fn config(path: &Path, message: impl Into<String>) -> Self {
        HarnessError::Config { path: path.to_path_buf(), message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config { .. } => EXIT_CONFIG,
            HarnessError::Engine(e) if e.is_numerical() => EXIT_NUMERICAL,
            HarnessError::PartialFailure { numerical: true, .. } => EXIT_NUMERICAL,
            HarnessError::Io { .. } | HarnessError::Engine(_) | HarnessError::Fit(_) | HarnessError::PartialFailure { .. } => EXIT_ENGINE,
        }
    }
}

/// Output directory of one command run.
pub struct RunDir {
    pub root: PathBuf,
    digest: String,
}

impl RunDir {
    /// Create the directory and write `config.toml` and `metadata.toml`.
    pub fn create(config: &ExperimentConfig, command: &str) -> Result<Self, HarnessError> {
        let root = config.output_dir.clone();
        let run = RunDir { root, digest: config.digest() };
        run.mkdir(&run.root)?;
        run.mkdir(&run.root.join("points"))?;
        let resolved = toml::to_string(config).expect("config serializes");
        run.write("config.toml", &resolved)?;
        let mut meta = String::new();
        let _ = writeln!(meta, "command = \"{command}\"");
        let _ = writeln!(meta, "config_digest = \"{}\"", run.digest);
        let _ = writeln!(meta, "seed = {}", config.seed);
        let _ = writeln!(meta, "version = \"{}\"", env!("CARGO_PKG_VERSION"));
        run.write("metadata.toml", &meta)?;
        Ok(run)
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }

    fn mkdir(&self, path: &Path) -> Result<(), HarnessError> {
        std::fs::create_dir_all(path).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
    }

    /// Write `name` atomically (temporary file, then rename).
    pub fn write(&self, name: &str, contents: &str) -> Result<(), HarnessError> {
        let path = self.root.join(name);
        let tmp = path.with_extension("partial");
        let io = |source| HarnessError::Io { path: path.clone(), source };
        std::fs::write(&tmp, contents).map_err(io)?;
        std::fs::rename(&tmp, &path).map_err(io)
    }

    fn point_path(&self, name: &str) -> PathBuf {
        self.root.join("points").join(name)
    }

    /// Body of a checkpoint written by this configuration, if present.
    pub fn load_point(&self, name: &str) -> Option<String> {
        let text = std::fs::read_to_string(self.point_path(name)).ok()?;
        let (first, rest) = text.split_once('\n')?;
        (first.strip_prefix("# digest ") == Some(self.digest.as_str())).then(|| rest.to_string())
    }

    pub fn save_point(&self, name: &str, body: &str) -> Result<(), HarnessError> {
        self.write(&format!("points/{name}"), &format!("# digest {}\n{body}", self.digest))
    }

    /// Record per-point failures; empty lists remove a stale file.
    pub fn record_failures(&self, failures: &[(String, String)], total: usize) -> Result<(), HarnessError> {
        let path = self.root.join("failures.txt");
        if failures.is_empty() {
            let _ = std::fs::remove_file(path);
            return Ok(());
        }
        let mut text = String::from("# point error\n");
        for (point, message) in failures {
            let _ = writeln!(text, "{point} {message}");
        }
        self.write("failures.txt", &text)?;
        Err(HarnessError::PartialFailure {
            failed: failures.len(),
            total,
            numerical: failures.iter().any(|(_, m)| m.starts_with(NUMERICAL_TAG)),
        })
    }
}

/// Prefix marking failures raised by numerical sanity checks.
pub(crate) const NUMERICAL_TAG: &str = "[numerical]";

pub(crate) fn describe(error: &EngineError) -> String {
    if error.is_numerical() {
        format!("{NUMERICAL_TAG} {error}")
    } else {
        error.to_string()
    }
}
