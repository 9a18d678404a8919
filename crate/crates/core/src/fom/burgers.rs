//! Closed-form viscous Burgers solution on `x ∈ [0, 1]`.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std inherent methods when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{single_viscosity, FomError, FomProvider};
use crate::grid::linspace;
use crate::linalg::Matrix;
use crate::pod::SnapshotMatrix;

/// Exponents above this are treated as infinite.
const EXP_LIMIT: f64 = 700.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BurgersConfig {
    /// Equally spaced nodes on `[0, 1]`, endpoints included.
    pub grid_nodes: usize,
}

impl Default for BurgersConfig {
    fn default() -> Self {
        Self { grid_nodes: 150 }
    }
}

impl BurgersConfig {
    pub fn validate(&self) -> Result<(), FomError> {
        if self.grid_nodes < 2 {
            return Err(FomError::ConfigError("burgers needs at least 2 nodes".into()));
        }
        Ok(())
    }
}

/// `u(x, t) = (x/(t+1)) / (1 + sqrt((t+1)/κ′) exp(Re x²/(4t+4)))`,
/// `κ′ = exp(Re/8)`.
///
/// The denominator's exponential factor is combined in log space; past
/// `exp(700)` the value is returned as its limit 0.
pub fn burgers_exact(re: f64, x: f64, t: f64) -> f64 {
    let tp1 = t + 1.0;
    let log_factor = 0.5 * tp1.ln() - re / 16.0 + re * x * x / (4.0 * tp1);
    if log_factor > EXP_LIMIT {
        return 0.0;
    }
    (x / tp1) / (1.0 + log_factor.exp())
}

/// Snapshot matrix of the exact solution for `Re = 1/ν`.
pub fn burgers_snapshots(
    nodes: &[f64],
    nu: f64,
    time_grid: &[f64],
) -> Result<SnapshotMatrix, FomError> {
    let re = 1.0 / nu;
    let data = Matrix::from_fn(nodes.len(), time_grid.len(), |i, j| {
        burgers_exact(re, nodes[i], time_grid[j])
    });
    Ok(SnapshotMatrix::new(
        data,
        time_grid.to_vec(),
        alloc::vec![nu],
        "u",
    )?)
}

#[derive(Clone, Debug)]
pub struct BurgersProvider {
    nodes: Vec<f64>,
}

impl BurgersProvider {
    pub fn new(cfg: BurgersConfig) -> Result<Self, FomError> {
        cfg.validate()?;
        Ok(Self {
            nodes: linspace(0.0, 1.0, cfg.grid_nodes),
        })
    }
}

impl FomProvider for BurgersProvider {
    fn component_labels(&self) -> Vec<String> {
        alloc::vec!["u".into()]
    }

    fn spatial_grid(&self) -> &[f64] {
        &self.nodes
    }

    fn solve(&self, mu: &[f64], time_grid: &[f64]) -> Result<Vec<SnapshotMatrix>, FomError> {
        let nu = single_viscosity(mu)?;
        Ok(alloc::vec![burgers_snapshots(&self.nodes, nu, time_grid)?])
    }
}
