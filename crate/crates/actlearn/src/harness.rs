//! Evaluation against full-order truth, sampling comparisons and timings.

use std::collections::BTreeMap;
use std::time::Instant;

use actlearn_core::active::{run_offline_timed, OfflineOutcome};
use actlearn_core::estimator::{
    build_estimator, relative_error_norms, relative_errors, ErrorEstimator, ErrorSnapshot,
};
use actlearn_core::fom::{provider_for, FomConfig, FomProvider};
use actlearn_core::linalg::Matrix;
use actlearn_core::pod::{compute_pod, pod_approximation, SnapshotMatrix, Truncation};
use actlearn_core::{NormKind, TrainedSurrogate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::runtime::{InstantClock, ParallelFom};
use crate::sampling::{default_random_budget, random_subset};

pub type BoxedFom = ParallelFom<Box<dyn FomProvider + Send + Sync>>;

pub fn fom_for(cfg: &FomConfig) -> Result<BoxedFom, CliError> {
    Ok(ParallelFom::new(provider_for(cfg)?))
}

/// Offline phase with wall-clock timing on the worker pool.
pub fn train(cfg: &RunConfig) -> Result<OfflineOutcome, CliError> {
    cfg.validate()?;
    let fom = fom_for(&cfg.fom)?;
    Ok(run_offline_timed(&fom, &cfg.active_config(), &InstantClock::new())?)
}

/// Full-order states at `times`, one `N × |times|` matrix per component.
///
/// Solvers start from `t = 0`; when the first requested time is later the
/// initial column is computed and dropped.
pub fn truth<P: FomProvider + ?Sized>(fom: &P, mu: &[f64], times: &[f64]) -> Result<Vec<Matrix>, CliError> {
    let prepend = times.first().is_none_or(|&t| t > 0.0);
    let mut grid = Vec::with_capacity(times.len() + 1);
    if prepend {
        grid.push(0.0);
    }
    grid.extend_from_slice(times);
    let skip = usize::from(prepend);
    Ok(fom
        .solve(mu, &grid)?
        .into_iter()
        .map(|s| {
            let d = s.data();
            Matrix::from_fn(d.rows(), times.len(), |i, j| d[(i, j + skip)])
        })
        .collect())
}

/// Per-time relative errors of a surrogate trajectory, one vector per component.
pub fn trajectory_errors(
    surrogate: &TrainedSurrogate,
    truth: &[Matrix],
    mu: &[f64],
    times: &[f64],
    norm: NormKind,
) -> Result<Vec<Vec<f64>>, CliError> {
    let tr = surrogate.query_trajectory(mu, times)?;
    tr.solutions
        .iter()
        .zip(truth)
        .map(|(approx, exact)| Ok(relative_errors(exact, approx, norm)?))
        .collect()
}

pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.iter().fold(0.0, |a, x| a + x) / v.len() as f64
}

/// Time average of the interpolated per-time errors.
pub fn mean_estimate(estimator: &ErrorEstimator, mu: &[f64]) -> Result<f64, CliError> {
    Ok(mean(&estimator.per_time(mu)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestError {
    pub parameter: f64,
    pub component: String,
    /// Time-averaged relative error over the evaluation times.
    pub mean_error: f64,
    pub max_error: f64,
    /// Time-averaged estimator value on the training time grid.
    pub estimate: f64,
}

/// Errors of the trained surrogate at the configured test parameters.
pub fn test_errors(cfg: &RunConfig, outcome: &OfflineOutcome) -> Result<Vec<TestError>, CliError> {
    let fom = fom_for(&cfg.fom)?;
    let times = cfg.evaluation_times();
    let mut out = Vec::new();
    for mu in &cfg.test_parameters {
        let exact = truth(&fom, mu, &times)?;
        let errs = trajectory_errors(&outcome.surrogate, &exact, mu, &times, cfg.norm)?;
        for ((label, e), est) in outcome.report.component_labels.iter().zip(&errs).zip(&outcome.estimators) {
            out.push(TestError {
                parameter: mu[0],
                component: label.clone(),
                mean_error: mean(e),
                max_error: e.iter().copied().fold(0.0, f64::max),
                estimate: mean_estimate(est, mu)?,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Active,
    Random,
    /// Random subset as large as the final active-learning set.
    QuasiRandom,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Active => "active",
            Strategy::Random => "random",
            Strategy::QuasiRandom => "quasi_random",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub strategy: Strategy,
    pub seed: Option<u64>,
    pub budget: usize,
    pub component: String,
    pub test_parameter: f64,
    pub error: f64,
    pub estimate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub tolerance: f64,
    pub initial_count: usize,
    pub selected_count: usize,
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    pub fn rows_for(&self, strategy: Strategy) -> impl Iterator<Item = &ComparisonRow> {
        self.rows.iter().filter(move |r| r.strategy == strategy)
    }

    pub fn max_error(&self, strategy: Strategy) -> f64 {
        self.rows_for(strategy).map(|r| r.error).fold(0.0, f64::max)
    }
}

/// Full-order snapshots and their POD errors at fixed truncation levels,
/// per grid index, computed on demand.
struct SnapshotCache<'a> {
    fom: &'a BoxedFom,
    cfg: &'a RunConfig,
    grid: Vec<Vec<f64>>,
    times: Vec<f64>,
    energies: Vec<f64>,
    solved: BTreeMap<usize, (Vec<SnapshotMatrix>, Vec<ErrorSnapshot>)>,
}

impl SnapshotCache<'_> {
    fn fill(&mut self, indices: &[usize]) -> Result<(), CliError> {
        let missing: Vec<usize> = indices.iter().copied().filter(|i| !self.solved.contains_key(i)).collect();
        let mus: Vec<Vec<f64>> = missing.iter().map(|&i| self.grid[i].clone()).collect();
        for (i, snaps) in missing.into_iter().zip(self.fom.solve_batch(&mus, &self.times)?) {
            let errs = snaps
                .par_iter()
                .zip(&self.energies)
                .map(|(s, &eta)| {
                    let basis = compute_pod(s, Truncation::Energy(eta))?;
                    let approx = pod_approximation(s.data(), &basis)?;
                    Ok(relative_error_norms(s, &approx, self.cfg.norm)?)
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            self.solved.insert(i, (snaps, errs));
        }
        Ok(())
    }

    /// POD-KSNN surrogate and estimators trained on a fixed parameter
    /// subset with the cached truncation levels.
    fn model(&mut self, indices: &[usize]) -> Result<(TrainedSurrogate, Vec<ErrorEstimator>), CliError> {
        self.fill(indices)?;
        let space = self.cfg.parameter_space();
        let snaps: Vec<Vec<SnapshotMatrix>> = indices.iter().map(|i| self.solved[i].0.clone()).collect();
        let surrogate =
            TrainedSurrogate::from_snapshots(&snaps, &self.energies, &self.cfg.kernel, &self.cfg.time_kernel, &space)?;
        let estimators = (0..self.energies.len())
            .map(|c| {
                let errs: Vec<ErrorSnapshot> = indices.iter().map(|i| self.solved[i].1[c].clone()).collect();
                Ok(build_estimator(&errs, &self.cfg.kernel, &space)?)
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok((surrogate, estimators))
    }
}

/// Active learning against seeded random subsets of the same grid.
///
/// For every seed, one random subset per budget (default
/// `|initial| + ⌈selected / 2⌉`) and one quasi-random subset as large as the
/// final active set. Errors are time-averaged over the evaluation times.
pub fn compare_sampling(cfg: &RunConfig, active: &OfflineOutcome) -> Result<Comparison, CliError> {
    let fom = fom_for(&cfg.fom)?;
    let times = cfg.evaluation_times();
    let grid = cfg.candidate_grid();
    let labels = &active.report.component_labels;
    let truths = cfg
        .test_parameters
        .iter()
        .map(|mu| truth(&fom, mu, &times))
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    let mut push_rows = |strategy, seed, budget, s: &TrainedSurrogate, est: &[ErrorEstimator]| -> Result<(), CliError> {
        for (mu, exact) in cfg.test_parameters.iter().zip(&truths) {
            let errs = trajectory_errors(s, exact, mu, &times, cfg.norm)?;
            for ((label, e), est) in labels.iter().zip(&errs).zip(est) {
                rows.push(ComparisonRow {
                    strategy,
                    seed,
                    budget,
                    component: label.clone(),
                    test_parameter: mu[0],
                    error: mean(e),
                    estimate: mean_estimate(est, mu)?,
                });
            }
        }
        Ok(())
    };

    let total = active.report.parameters.len();
    let selected = active.report.selected_indices.len();
    push_rows(Strategy::Active, None, total, &active.surrogate, &active.estimators)?;

    let budgets = if cfg.budgets.is_empty() {
        vec![default_random_budget(cfg.initial_indices.len(), selected, grid.len())]
    } else {
        cfg.budgets.clone()
    };
    let mut cache = SnapshotCache {
        fom: &fom,
        cfg,
        grid: grid.clone(),
        times: cfg.time_grid(),
        energies: active.report.energy_hat.clone(),
        solved: BTreeMap::new(),
    };
    for &seed in &cfg.seeds {
        let plans = budgets
            .iter()
            .map(|&b| (Strategy::Random, b))
            .chain([(Strategy::QuasiRandom, total)]);
        for (strategy, budget) in plans {
            let subset = random_subset(grid.len(), budget, seed);
            log::info!("{} seed {seed}: {budget} parameters", strategy.name());
            let (s, est) = cache.model(&subset)?;
            push_rows(strategy, Some(seed), budget, &s, &est)?;
        }
    }
    Ok(Comparison {
        tolerance: cfg.tolerance,
        initial_count: cfg.initial_indices.len(),
        selected_count: selected,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRun {
    /// One full-order solve at the timing parameter on the training grid.
    pub fom_seconds: f64,
    /// Offline phase: time spent in full-order solves.
    pub offline_fom_seconds: f64,
    /// Offline phase excluding full-order solves.
    pub offline_learning_seconds: f64,
    /// Online trajectory query at the timing parameter on the training grid.
    pub online_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub problem: String,
    pub state_dim: usize,
    pub time_instances: usize,
    pub parameter: Vec<f64>,
    pub runs: Vec<TimingRun>,
    pub mean_fom_seconds: f64,
    pub mean_offline_fom_seconds: f64,
    pub mean_offline_learning_seconds: f64,
    pub mean_online_seconds: f64,
    /// `mean_fom_seconds / mean_online_seconds`.
    pub speedup: f64,
}

/// Averages `cfg.timing_runs` independent executions of the offline phase,
/// one full-order solve and one online query.
///
/// The timing parameter is the first test parameter, or the geometric
/// middle of the grid when none is configured.
pub fn timings(cfg: &RunConfig) -> Result<TimingReport, CliError> {
    cfg.validate()?;
    let fom = fom_for(&cfg.fom)?;
    let time_grid = cfg.time_grid();
    let mu = cfg.test_parameters.first().cloned().unwrap_or_else(|| {
        let g = &cfg.parameter_grid;
        vec![(g.start * g.end).sqrt()]
    });
    let mut runs = Vec::with_capacity(cfg.timing_runs);
    for run in 0..cfg.timing_runs {
        let outcome = run_offline_timed(&fom, &cfg.active_config(), &InstantClock::new())?;
        let t0 = Instant::now();
        let solved = fom.solve(&mu, &time_grid)?;
        let fom_seconds = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let online = outcome.surrogate.query_trajectory(&mu, &time_grid)?;
        let online_seconds = t1.elapsed().as_secs_f64();
        debug_assert_eq!(online.solutions.len(), solved.len());
        log::info!("timing run {}: fom {fom_seconds:.4} s, online {online_seconds:.4} s", run + 1);
        runs.push(TimingRun {
            fom_seconds,
            offline_fom_seconds: outcome.report.timing.fom_seconds,
            offline_learning_seconds: outcome.report.timing.learning_seconds,
            online_seconds,
        });
    }
    let avg = |f: fn(&TimingRun) -> f64| mean(&runs.iter().map(f).collect::<Vec<_>>());
    let mean_fom_seconds = avg(|r| r.fom_seconds);
    let mean_online_seconds = avg(|r| r.online_seconds);
    Ok(TimingReport {
        problem: cfg.fom.kind().name().into(),
        state_dim: fom.spatial_grid().len(),
        time_instances: time_grid.len(),
        parameter: mu,
        mean_fom_seconds,
        mean_offline_fom_seconds: avg(|r| r.offline_fom_seconds),
        mean_offline_learning_seconds: avg(|r| r.offline_learning_seconds),
        mean_online_seconds,
        speedup: mean_fom_seconds / mean_online_seconds,
        runs,
    })
}
