//! Full-order models behind one interface.
//!
//! Both problems take the viscosity `ν` as their single parameter.

mod burgers;
mod swe;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::pod::{PodError, SnapshotMatrix};

pub use burgers::{burgers_exact, burgers_snapshots, BurgersConfig, BurgersProvider};
pub use swe::{
    initial_height, swe_solve, swe_solve_from, SweConfig, SweDiagnostics, SweProvider,
    SweSolution, INITIAL_VELOCITY,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FomError {
    #[error("configuration error: {0}")]
    ConfigError(String),
    #[error("time step became invalid at t = {time} (dt = {dt})")]
    CflViolation { time: f64, dt: f64 },
    #[error("non-positive or non-finite depth {depth} in cell {cell} at t = {time}")]
    NonPositiveDepth { cell: usize, time: f64, depth: f64 },
    #[error(transparent)]
    Snapshot(#[from] PodError),
}

/// A high-fidelity model producing one snapshot matrix per solution
/// component for a parameter and a time grid.
pub trait FomProvider {
    fn component_labels(&self) -> Vec<String>;

    /// Node coordinates; every snapshot has this many rows.
    fn spatial_grid(&self) -> &[f64];

    fn solve(&self, mu: &[f64], time_grid: &[f64]) -> Result<Vec<SnapshotMatrix>, FomError>;

    /// Solves several parameters. Implementations may run them concurrently;
    /// results are returned in input order.
    fn solve_batch(
        &self,
        mus: &[Vec<f64>],
        time_grid: &[f64],
    ) -> Result<Vec<Vec<SnapshotMatrix>>, FomError> {
        mus.iter().map(|mu| self.solve(mu, time_grid)).collect()
    }

    fn component_count(&self) -> usize {
        self.component_labels().len()
    }
}

impl<P: FomProvider + ?Sized> FomProvider for &P {
    fn component_labels(&self) -> Vec<String> {
        (**self).component_labels()
    }
    fn spatial_grid(&self) -> &[f64] {
        (**self).spatial_grid()
    }
    fn solve(&self, mu: &[f64], time_grid: &[f64]) -> Result<Vec<SnapshotMatrix>, FomError> {
        (**self).solve(mu, time_grid)
    }
    fn solve_batch(
        &self,
        mus: &[Vec<f64>],
        time_grid: &[f64],
    ) -> Result<Vec<Vec<SnapshotMatrix>>, FomError> {
        (**self).solve_batch(mus, time_grid)
    }
}

impl<P: FomProvider + ?Sized> FomProvider for Box<P> {
    fn component_labels(&self) -> Vec<String> {
        (**self).component_labels()
    }
    fn spatial_grid(&self) -> &[f64] {
        (**self).spatial_grid()
    }
    fn solve(&self, mu: &[f64], time_grid: &[f64]) -> Result<Vec<SnapshotMatrix>, FomError> {
        (**self).solve(mu, time_grid)
    }
    fn solve_batch(
        &self,
        mus: &[Vec<f64>],
        time_grid: &[f64],
    ) -> Result<Vec<Vec<SnapshotMatrix>>, FomError> {
        (**self).solve_batch(mus, time_grid)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Burgers,
    Swe,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Burgers => "burgers",
            ProblemKind::Swe => "swe",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, FomError> {
        match name {
            "burgers" => Ok(ProblemKind::Burgers),
            "swe" => Ok(ProblemKind::Swe),
            other => Err(FomError::ConfigError(alloc::format!("unknown problem `{other}`"))),
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Problem selection plus its solver settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "problem", rename_all = "snake_case")]
pub enum FomConfig {
    Burgers(BurgersConfig),
    Swe(SweConfig),
}

impl FomConfig {
    pub fn kind(&self) -> ProblemKind {
        match self {
            FomConfig::Burgers(_) => ProblemKind::Burgers,
            FomConfig::Swe(_) => ProblemKind::Swe,
        }
    }

    pub fn validate(&self) -> Result<(), FomError> {
        match self {
            FomConfig::Burgers(c) => c.validate(),
            FomConfig::Swe(c) => c.validate(),
        }
    }
}

pub fn provider_for(cfg: &FomConfig) -> Result<Box<dyn FomProvider + Send + Sync>, FomError> {
    cfg.validate()?;
    Ok(match cfg {
        FomConfig::Burgers(c) => Box::new(BurgersProvider::new(c.clone())?),
        FomConfig::Swe(c) => Box::new(SweProvider::new(c.clone())?),
    })
}

pub(crate) fn single_viscosity(mu: &[f64]) -> Result<f64, FomError> {
    match mu {
        [nu] if *nu > 0.0 && nu.is_finite() => Ok(*nu),
        [nu] => Err(FomError::ConfigError(alloc::format!(
            "viscosity must be positive and finite, got {nu}"
        ))),
        _ => Err(FomError::ConfigError(alloc::format!(
            "expected one parameter (viscosity), got {}",
            mu.len()
        ))),
    }
}
