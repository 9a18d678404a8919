//! Two-step interpolation surrogate.
//!
//! Offline, one vector-output network per training time instance maps a
//! parameter to the full state at that instant. Online, the networks are
//! evaluated at the query parameter to assemble an approximate snapshot
//! matrix, which is compressed by an energy-truncated SVD; the reduced
//! coordinates are then interpolated in time by a second network and
//! lifted back through the basis.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::grid::ParameterSpace;
use crate::ksnn::{kernel_row, KernelChoice, KernelSpec, Ksnn, KsnnError, KsnnTrainer};
use crate::linalg::{thin_svd_with, LinalgError, Matrix, SvdMethod};
use crate::pod::{minimal_rank, PodError, SnapshotMatrix};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SurrogateError {
    #[error("query time {time} outside [{start}, {end}] by more than one time step")]
    TimeOutOfRange { time: f64, start: f64, end: f64 },
    #[error("snapshot matrices do not share a time grid")]
    MismatchedTimeGrids,
    #[error("no training parameters")]
    NoParameters,
    #[error("component count mismatch: expected {expected}, found {found}")]
    ComponentMismatch { expected: usize, found: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("time grid needs at least two instances")]
    ShortTimeGrid,
    #[error("approximate snapshot matrix vanished at the query parameter")]
    DegenerateQuery,
    #[error(transparent)]
    Ksnn(#[from] KsnnError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Pod(#[from] PodError),
}

/// Parameter-space networks of one solution component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentModel {
    pub label: String,
    /// Network `j` reproduces column `j` of every training snapshot matrix.
    pub networks: Vec<Ksnn>,
    /// Discarded-energy level used to truncate online bases.
    pub energy: f64,
}

/// Trains `I^μ_{t_j}` for every time instance of every component.
///
/// `snapshots[i][c]` is component `c` at parameter `i`. All networks share
/// one factorization of the kernel matrix.
pub fn train_parameter_networks(
    snapshots: &[Vec<SnapshotMatrix>],
    kernel: &KernelChoice,
    space: &ParameterSpace,
) -> Result<Vec<Vec<Ksnn>>, SurrogateError> {
    let first = snapshots.first().ok_or(SurrogateError::NoParameters)?;
    let components = first.len();
    let time_grid = first
        .first()
        .ok_or(SurrogateError::ComponentMismatch {
            expected: 1,
            found: 0,
        })?
        .time_grid();
    for per_param in snapshots {
        if per_param.len() != components {
            return Err(SurrogateError::ComponentMismatch {
                expected: components,
                found: per_param.len(),
            });
        }
        for (c, s) in per_param.iter().enumerate() {
            if s.time_grid() != time_grid {
                return Err(SurrogateError::MismatchedTimeGrids);
            }
            if s.state_dim() != first[c].state_dim() {
                return Err(SurrogateError::DimensionMismatch {
                    expected: first[c].state_dim(),
                    found: s.state_dim(),
                });
            }
        }
    }

    let params: Vec<Vec<f64>> = snapshots.iter().map(|p| p[0].parameter().to_vec()).collect();
    let coords = space.to_coords_all(&params);
    let spec = kernel.resolve(&coords)?;
    let trainer = KsnnTrainer::new(&coords, spec)?;

    let l = snapshots.len();
    let mut out = Vec::with_capacity(components);
    for c in 0..components {
        let n = first[c].state_dim();
        let mut nets = Vec::with_capacity(time_grid.len());
        for j in 0..time_grid.len() {
            // Row i of the training values is the state of parameter i at t_j.
            let mut values = Matrix::zeros(l, n);
            for (i, per_param) in snapshots.iter().enumerate() {
                let col = per_param[c].data().column(j);
                for (k, &v) in col.iter().enumerate() {
                    values[(i, k)] = v;
                }
            }
            nets.push(trainer.train(&values, false)?);
        }
        out.push(nets);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct SurrogateData {
    components: Vec<ComponentModel>,
    time_grid: Vec<f64>,
    parameters: Vec<Vec<f64>>,
    space: ParameterSpace,
    time_kernel: KernelChoice,
}

/// The trained surrogate. Immutable; queries may run concurrently.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "SurrogateData", into = "SurrogateData")]
pub struct TrainedSurrogate {
    data: SurrogateData,
    /// Factored time-kernel matrix, shared by every query.
    time_trainer: KsnnTrainer,
    bounds: Vec<(f64, f64)>,
}

impl PartialEq for TrainedSurrogate {
    fn eq(&self, other: &Self) -> bool {
        self.data == other.data
    }
}

impl From<TrainedSurrogate> for SurrogateData {
    fn from(s: TrainedSurrogate) -> Self {
        s.data
    }
}

impl TryFrom<SurrogateData> for TrainedSurrogate {
    type Error = SurrogateError;

    fn try_from(data: SurrogateData) -> Result<Self, Self::Error> {
        if data.time_grid.len() < 2 {
            return Err(SurrogateError::ShortTimeGrid);
        }
        if data.parameters.is_empty() {
            return Err(SurrogateError::NoParameters);
        }
        for c in &data.components {
            if c.networks.len() != data.time_grid.len() {
                return Err(SurrogateError::DimensionMismatch {
                    expected: data.time_grid.len(),
                    found: c.networks.len(),
                });
            }
        }
        let times: Vec<Vec<f64>> = data.time_grid.iter().map(|&t| alloc::vec![t]).collect();
        let spec = data.time_kernel.resolve(&times)?;
        let time_trainer = KsnnTrainer::new(&times, spec)?;
        let dim = data.parameters[0].len();
        let bounds = (0..dim)
            .map(|k| {
                data.parameters.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                    (lo.min(p[k]), hi.max(p[k]))
                })
            })
            .collect();
        Ok(Self {
            data,
            time_trainer,
            bounds,
        })
    }
}

/// Result of a single-time query.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnlineQueryResult {
    /// One state vector per component.
    pub solution: Vec<Vec<f64>>,
    /// Online basis rank `r*` per component.
    pub ranks: Vec<usize>,
    /// Interpolated reduced coordinates `α(t*)` per component.
    pub reduced_coordinates: Vec<Vec<f64>>,
    /// Set when the parameter lies outside the training box.
    pub extrapolated: bool,
}

/// Result of a multi-time query: per component an `N × |times|` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryResult {
    pub solutions: Vec<Matrix>,
    pub ranks: Vec<usize>,
    pub extrapolated: bool,
}

/// Per-component reduced model at a fixed query parameter.
struct ReducedModel {
    basis: Matrix,
    time_net: Ksnn,
}

impl TrainedSurrogate {
    pub fn new(
        components: Vec<ComponentModel>,
        time_grid: Vec<f64>,
        parameters: Vec<Vec<f64>>,
        space: ParameterSpace,
        time_kernel: KernelChoice,
    ) -> Result<Self, SurrogateError> {
        Self::try_from(SurrogateData {
            components,
            time_grid,
            parameters,
            space,
            time_kernel,
        })
    }

    /// Trains the parameter networks on `snapshots[i][c]` and assembles the
    /// surrogate with the given per-component truncation energies.
    pub fn from_snapshots(
        snapshots: &[Vec<SnapshotMatrix>],
        energies: &[f64],
        kernel: &KernelChoice,
        time_kernel: &KernelChoice,
        space: &ParameterSpace,
    ) -> Result<Self, SurrogateError> {
        let nets = train_parameter_networks(snapshots, kernel, space)?;
        if energies.len() != nets.len() {
            return Err(SurrogateError::ComponentMismatch {
                expected: nets.len(),
                found: energies.len(),
            });
        }
        let first = &snapshots[0];
        let components = nets
            .into_iter()
            .zip(energies)
            .zip(first)
            .map(|((networks, &energy), s)| ComponentModel {
                label: s.label().into(),
                networks,
                energy,
            })
            .collect();
        let parameters = snapshots.iter().map(|p| p[0].parameter().to_vec()).collect();
        Self::new(
            components,
            first[0].time_grid().to_vec(),
            parameters,
            space.clone(),
            *time_kernel,
        )
    }

    pub fn components(&self) -> &[ComponentModel] {
        &self.data.components
    }

    pub fn component_labels(&self) -> Vec<String> {
        self.data.components.iter().map(|c| c.label.clone()).collect()
    }

    pub fn time_grid(&self) -> &[f64] {
        &self.data.time_grid
    }

    pub fn parameters(&self) -> &[Vec<f64>] {
        &self.data.parameters
    }

    pub fn parameter_space(&self) -> &ParameterSpace {
        &self.data.space
    }

    pub fn time_kernel(&self) -> KernelSpec {
        self.time_trainer.kernel()
    }

    pub fn is_extrapolation(&self, mu: &[f64]) -> bool {
        mu.iter()
            .zip(&self.bounds)
            .any(|(&x, &(lo, hi))| x < lo || x > hi)
    }

    fn check_time(&self, t: f64) -> Result<(), SurrogateError> {
        let g = &self.data.time_grid;
        let start = g[0];
        let end = g[g.len() - 1];
        let slack_lo = g[1] - g[0];
        let slack_hi = g[g.len() - 1] - g[g.len() - 2];
        if !(t >= start - slack_lo && t <= end + slack_hi) {
            return Err(SurrogateError::TimeOutOfRange { time: t, start, end });
        }
        Ok(())
    }

    /// `U^I(μ*)` for every component: the parameter networks evaluated at
    /// `μ*` on the training time grid.
    pub fn interpolated_snapshots(&self, mu: &[f64]) -> Result<Vec<Matrix>, SurrogateError> {
        let coords = self.data.space.to_coords(mu);
        let mut out = Vec::with_capacity(self.data.components.len());
        for comp in &self.data.components {
            let first = &comp.networks[0];
            let row = kernel_row(first.centers(), &first.kernel(), &coords)?;
            let n = first.output_dim();
            let mut cols = Vec::with_capacity(n * comp.networks.len());
            for net in &comp.networks {
                cols.extend(net.evaluate_from_kernel_row(&row));
            }
            out.push(Matrix::from_col_major(n, comp.networks.len(), cols)?);
        }
        Ok(out)
    }

    fn reduce(&self, mu: &[f64]) -> Result<Vec<ReducedModel>, SurrogateError> {
        let snaps = self.interpolated_snapshots(mu)?;
        let mut out = Vec::with_capacity(snaps.len());
        for (ui, comp) in snaps.iter().zip(&self.data.components) {
            // Only the leading spectrum is kept online; the Gram route is
            // accurate there and far cheaper than Jacobi.
            let method = if ui.rows() >= ui.cols() {
                SvdMethod::Snapshots
            } else {
                SvdMethod::Direct
            };
            let svd = thin_svd_with(ui, method)?;
            if svd.rank() == 0 {
                return Err(SurrogateError::DegenerateQuery);
            }
            let r = minimal_rank(&svd.singular_values, comp.energy).max(1);
            let basis = svd.left_vectors.leading_columns(r);
            // Training values for the time network: row j is α^j = Φ̃ᵀ U^I_j.
            let coeffs = basis.tr_matmul(ui)?;
            let time_net = self.time_trainer.train(&coeffs.transpose(), false)?;
            out.push(ReducedModel { basis, time_net });
        }
        Ok(out)
    }

    /// Surrogate state at `(t*, μ*)`.
    pub fn query(&self, mu: &[f64], t: f64) -> Result<OnlineQueryResult, SurrogateError> {
        self.check_time(t)?;
        let models = self.reduce(mu)?;
        let mut solution = Vec::with_capacity(models.len());
        let mut ranks = Vec::with_capacity(models.len());
        let mut reduced = Vec::with_capacity(models.len());
        for m in &models {
            let alpha = m.time_net.evaluate(&[t])?;
            solution.push(m.basis.mul_vec(&alpha)?);
            ranks.push(m.basis.cols());
            reduced.push(alpha);
        }
        Ok(OnlineQueryResult {
            solution,
            ranks,
            reduced_coordinates: reduced,
            extrapolated: self.is_extrapolation(mu),
        })
    }

    /// Surrogate trajectory at `μ*`; the basis and time network are built
    /// once and evaluated at every requested time.
    pub fn query_trajectory(
        &self,
        mu: &[f64],
        times: &[f64],
    ) -> Result<TrajectoryResult, SurrogateError> {
        for &t in times {
            self.check_time(t)?;
        }
        let models = self.reduce(mu)?;
        let mut solutions = Vec::with_capacity(models.len());
        let mut ranks = Vec::with_capacity(models.len());
        for m in &models {
            let n = m.basis.rows();
            let mut data = Vec::with_capacity(n * times.len());
            for &t in times {
                let alpha = m.time_net.evaluate(&[t])?;
                data.extend(m.basis.mul_vec(&alpha)?);
            }
            solutions.push(Matrix::from_col_major(n, times.len(), data)?);
            ranks.push(m.basis.cols());
        }
        Ok(TrajectoryResult {
            solutions,
            ranks,
            extrapolated: self.is_extrapolation(mu),
        })
    }
}
