//! Persisted surrogate: everything `query` needs, as one JSON document.

use std::path::Path;

use actlearn_core::estimator::{estimate_component_average, ErrorEstimator};
use actlearn_core::fom::FomConfig;
use actlearn_core::{NormKind, TrainedSurrogate};
use serde::{Deserialize, Serialize};

use crate::config::read_json;
use crate::error::{CliError, FormatError};
use crate::report::write_json;

pub const MODEL_FORMAT: &str = "actlearn-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    /// Full-order model the surrogate was trained on; used for `--truth`.
    pub fom: FomConfig,
    pub norm: NormKind,
    pub surrogate: TrainedSurrogate,
    /// Final per-component error estimators.
    pub estimators: Vec<ErrorEstimator>,
}

impl ModelFile {
    pub fn new(fom: FomConfig, norm: NormKind, surrogate: TrainedSurrogate, estimators: Vec<ErrorEstimator>) -> Self {
        Self {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            fom,
            norm,
            surrogate,
            estimators,
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        // Check the envelope first so a wrong file reports a version problem
        // rather than a missing field.
        #[derive(Deserialize)]
        struct Envelope {
            format: String,
            version: u32,
        }
        let env: Envelope = read_json(path)?;
        if env.format != MODEL_FORMAT {
            return Err(FormatError::Header {
                path: path.to_path_buf(),
                reason: format!("format `{}` is not `{MODEL_FORMAT}`", env.format),
            }
            .into());
        }
        if env.version != MODEL_VERSION {
            return Err(FormatError::Version {
                path: path.to_path_buf(),
                found: env.version,
                expected: MODEL_VERSION,
            }
            .into());
        }
        read_json(path)
    }

    /// Component-averaged error estimate at `μ`, if estimators were stored.
    pub fn estimate(&self, mu: &[f64]) -> Result<Option<f64>, CliError> {
        if self.estimators.is_empty() {
            return Ok(None);
        }
        Ok(Some(estimate_component_average(&self.estimators, mu)?))
    }
}
