use std::io;
use std::path::PathBuf;

use actlearn_core::active::ActiveError;
use actlearn_core::estimator::EstimatorError;
use actlearn_core::fom::FomError;
use actlearn_core::ksnn::KsnnError;
use actlearn_core::pod::PodError;
use actlearn_core::surrogate::SurrogateError;

/// Failures reading or validating one of the binary or JSON artifacts.
#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: not a snapshot file (bad magic)")]
    BadMagic { path: PathBuf },
    #[error("{path}: unsupported format version {found} (expected {expected})")]
    Version {
        path: PathBuf,
        found: u32,
        expected: u32,
    },
    #[error("{path}: truncated or inconsistent header: {reason}")]
    Header { path: PathBuf, reason: String },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Active(#[from] ActiveError),
    #[error(transparent)]
    Fom(#[from] FomError),
    #[error(transparent)]
    Surrogate(#[from] SurrogateError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Pod(#[from] PodError),
    #[error(transparent)]
    Ksnn(#[from] KsnnError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for configuration and input problems, 3 for numerical failures, 4
    /// for IO and malformed files.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Active(ActiveError::Config(_)) => 2,
            CliError::Fom(FomError::ConfigError(_)) => 2,
            CliError::Active(ActiveError::FomFailure {
                source: FomError::ConfigError(_),
                ..
            }) => 2,
            CliError::Surrogate(SurrogateError::TimeOutOfRange { .. } | SurrogateError::DimensionMismatch { .. }) => 2,
            CliError::Format(_) | CliError::Io { .. } => 4,
            _ => 3,
        }
    }
}
