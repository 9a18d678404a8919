//! Greedy offline loop.
//!
//! Starting from an initial parameter set, each iteration picks the
//! candidate with the largest estimated POD error, solves the full-order
//! model there, truncates its POD basis at the initial energy level and then
//! enriches that basis while the new parameter carries the largest error in
//! the training set and that error exceeds the selection estimate. The loop
//! stops once the largest estimate is at most the tolerance.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::estimator::{build_estimator, relative_errors, ErrorEstimator, ErrorSnapshot, EstimatorError, NormKind};
use crate::fom::{FomError, FomProvider};
use crate::grid::ParameterSpace;
use crate::ksnn::KernelChoice;
use crate::pod::{compute_pod, pod_approximation, PodBasis, PodError, SnapshotMatrix, Truncation};
use crate::surrogate::{SurrogateError, TrainedSurrogate};

/// Source of elapsed seconds for the timing breakdown.
pub trait Clock {
    fn now(&self) -> f64;
}

/// Clock that always reads zero.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now(&self) -> f64 {
        0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActiveLearningConfig {
    /// Master parameter grid; indices below refer to it.
    pub candidate_grid: Vec<Vec<f64>>,
    pub initial_indices: Vec<usize>,
    pub time_grid: Vec<f64>,
    pub tolerance: f64,
    /// Discarded-energy level for fresh POD bases.
    pub initial_energy: f64,
    #[serde(default)]
    pub norm_kind: NormKind,
    #[serde(default)]
    pub kernel: KernelChoice,
    /// Kernel of the online time networks.
    #[serde(default)]
    pub time_kernel: KernelChoice,
    #[serde(default)]
    pub parameter_space: ParameterSpace,
    /// Defaults to the candidate count.
    #[serde(default)]
    pub max_iterations: Option<usize>,
    /// Defaults to `N_t`.
    #[serde(default)]
    pub max_enrichment_steps: Option<usize>,
    #[serde(default)]
    pub enrichment_guard: EnrichmentGuard,
}

impl ActiveLearningConfig {
    pub fn validate(&self) -> Result<(), ActiveError> {
        let n = self.candidate_grid.len();
        if self.initial_indices.len() < 2 {
            return Err(ActiveError::Config("at least two initial parameters required".into()));
        }
        for (k, &i) in self.initial_indices.iter().enumerate() {
            if i >= n {
                return Err(ActiveError::Config(alloc::format!(
                    "initial index {i} outside grid of {n}"
                )));
            }
            if self.initial_indices[..k].contains(&i) {
                return Err(ActiveError::Config(alloc::format!("duplicate initial index {i}")));
            }
        }
        if n < self.initial_indices.len() + 1 {
            return Err(ActiveError::Config("candidate grid must exceed the initial set".into()));
        }
        let dim = self.candidate_grid[0].len();
        if dim == 0 || self.candidate_grid.iter().any(|p| p.len() != dim) {
            return Err(ActiveError::Config("parameters must share a nonzero dimension".into()));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(ActiveError::Config("tolerance must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.initial_energy) {
            return Err(ActiveError::Config("initial energy must lie in [0, 1)".into()));
        }
        if self.time_grid.len() < 2 {
            return Err(ActiveError::Config("time grid needs at least two instances".into()));
        }
        if self.max_iterations == Some(0) || self.max_enrichment_steps == Some(0) {
            return Err(ActiveError::Config("iteration caps must be positive".into()));
        }
        Ok(())
    }

    pub fn enrichment_cap(&self) -> usize {
        self.max_enrichment_steps
            .unwrap_or(self.time_grid.len() - 1)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ActiveError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no candidates left")]
    EmptyCandidateSet,
    #[error("full-order model failed at grid index {index}: {source}")]
    FomFailure {
        index: usize,
        source: FomError,
        report: Box<ActiveLearningReport>,
    },
    #[error("full-order model returned {found} components, expected {expected}")]
    ComponentMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Pod(#[from] PodError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Surrogate(#[from] SurrogateError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateEstimate {
    pub index: usize,
    pub estimate: f64,
}

/// Returns the candidate with the largest estimate, lowest grid index on
/// ties.
pub fn select_next(estimates: &[CandidateEstimate]) -> Result<CandidateEstimate, ActiveError> {
    let mut best: Option<CandidateEstimate> = None;
    for &c in estimates {
        best = match best {
            None => Some(c),
            Some(b) if c.estimate > b.estimate || (c.estimate == b.estimate && c.index < b.index) => Some(c),
            keep => keep,
        };
    }
    best.ok_or(ActiveError::EmptyCandidateSet)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// Enrichment stopped because every component basis was at full rank.
    RankExhausted { iteration: usize, index: usize },
    /// Enrichment stopped at the step cap.
    EnrichmentCapReached {
        iteration: usize,
        index: usize,
        steps: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 1-based.
    pub iteration: usize,
    pub index: usize,
    pub parameter: Vec<f64>,
    /// Selection estimate `E^(iter)` (component average).
    pub estimate: f64,
    pub enrichment_steps: usize,
    /// Largest component-averaged error of the new parameter after
    /// enrichment.
    pub new_max_error: f64,
    /// Largest component-averaged error over the parameters already in the
    /// set when this one was added.
    pub previous_max_error: f64,
    pub ranks: Vec<usize>,
    /// Estimates of every candidate at selection time, by grid index.
    pub candidates: Vec<CandidateEstimate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterRecord {
    pub index: usize,
    pub parameter: Vec<f64>,
    pub initial: bool,
    pub ranks: Vec<usize>,
    pub max_ranks: Vec<usize>,
    /// Achieved discarded energy per component.
    pub energies: Vec<f64>,
    /// Largest per-time relative POD error per component.
    pub max_errors: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub fom_seconds: f64,
    pub learning_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActiveLearningReport {
    pub component_labels: Vec<String>,
    pub tolerance: f64,
    pub initial_energy: f64,
    pub initial_indices: Vec<usize>,
    /// Grid indices added by the loop, in order.
    pub selected_indices: Vec<usize>,
    pub history: Vec<IterationRecord>,
    /// The selection that satisfied the tolerance, if any.
    pub terminal_estimate: Option<CandidateEstimate>,
    /// Final training set in insertion order.
    pub parameters: Vec<ParameterRecord>,
    /// `η̂` per component.
    pub energy_hat: Vec<f64>,
    pub warnings: Vec<Warning>,
    pub tolerance_unreachable: bool,
    pub iteration_cap_reached: bool,
    pub timing: Timing,
}

/// Everything the offline phase produces.
#[derive(Clone, Debug)]
pub struct OfflineOutcome {
    pub surrogate: TrainedSurrogate,
    pub report: ActiveLearningReport,
    /// Estimators of the final training set, one per component.
    pub estimators: Vec<ErrorEstimator>,
    /// `error_snapshots[i][c]`, same order as `report.parameters`.
    pub error_snapshots: Vec<Vec<ErrorSnapshot>>,
}

/// One training parameter with its per-component data.
struct Member {
    index: usize,
    initial: bool,
    snapshots: Vec<SnapshotMatrix>,
    bases: Vec<PodBasis>,
    errors: Vec<Vec<f64>>,
}

impl Member {
    /// Per-time error averaged over components.
    fn averaged_errors(&self) -> Vec<f64> {
        let q = self.errors.len() as f64;
        let m = self.errors[0].len();
        (0..m)
            .map(|j| self.errors.iter().map(|e| e[j]).sum::<f64>() / q)
            .collect()
    }

    fn max_averaged_error(&self) -> f64 {
        self.averaged_errors().into_iter().fold(0.0, f64::max)
    }
}

fn pod_errors(snapshot: &SnapshotMatrix, basis: &PodBasis, norm: NormKind) -> Result<Vec<f64>, ActiveError> {
    let approx = pod_approximation(snapshot.data(), basis)?;
    Ok(relative_errors(snapshot.data(), &approx, norm)?)
}

fn make_member(
    index: usize,
    initial: bool,
    snapshots: Vec<SnapshotMatrix>,
    cfg: &ActiveLearningConfig,
) -> Result<Member, ActiveError> {
    let mut bases = Vec::with_capacity(snapshots.len());
    let mut errors = Vec::with_capacity(snapshots.len());
    for s in &snapshots {
        let b = compute_pod(s, Truncation::Energy(cfg.initial_energy))?;
        errors.push(pod_errors(s, &b, cfg.norm_kind)?);
        bases.push(b);
    }
    Ok(Member {
        index,
        initial,
        snapshots,
        bases,
        errors,
    })
}

/// Outcome of enriching one new parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnrichmentExit {
    Satisfied,
    RankExhausted,
    StepCap,
}

/// When the basis of a newly added parameter is grown.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnrichmentGuard {
    /// While, at some time instance, the new parameter carries the largest
    /// error of the training set and that error exceeds the selection
    /// estimate.
    PerTime,
    /// While the new parameter's largest error over all times is the
    /// largest of the training set and exceeds the selection estimate.
    #[default]
    Global,
}

impl EnrichmentGuard {
    /// `own[j]` and `others[j]` are component-averaged errors of the new
    /// parameter and their maximum over the rest of the set.
    pub fn should_grow(self, own: &[f64], others: &[f64], bound: f64) -> bool {
        match self {
            EnrichmentGuard::PerTime => own
                .iter()
                .zip(others)
                .any(|(&e, &o)| e > bound && e > o),
            EnrichmentGuard::Global => {
                let e = own.iter().copied().fold(0.0, f64::max);
                let o = others.iter().copied().fold(0.0, f64::max);
                e > bound && e > o
            }
        }
    }
}

/// Grows the bases of `member` one rank at a time while `guard` holds.
/// Every component that still has directions left is incremented in each
/// step.
fn enrich(
    member: &mut Member,
    others: &[f64],
    bound: f64,
    guard: EnrichmentGuard,
    cap: usize,
    norm: NormKind,
) -> Result<(usize, EnrichmentExit), ActiveError> {
    let mut steps = 0;
    loop {
        if !guard.should_grow(&member.averaged_errors(), others, bound) {
            return Ok((steps, EnrichmentExit::Satisfied));
        }
        if steps >= cap {
            return Ok((steps, EnrichmentExit::StepCap));
        }
        let mut grew = false;
        for c in 0..member.bases.len() {
            if member.bases[c].rank() < member.bases[c].max_rank() {
                member.bases[c].increment_in_place()?;
                member.errors[c] = pod_errors(&member.snapshots[c], &member.bases[c], norm)?;
                grew = true;
            }
        }
        if !grew {
            return Ok((steps, EnrichmentExit::RankExhausted));
        }
        steps += 1;
    }
}

/// Single-parameter enrichment on explicit data: `snapshots` and `bases`
/// are the new parameter's components, `others[j]` the largest
/// component-averaged error at time `j` over the rest of the training set
/// and `bound` the selection estimate.
pub fn enrich_new_parameter(
    snapshots: &[SnapshotMatrix],
    bases: &[PodBasis],
    others: &[f64],
    bound: f64,
    guard: EnrichmentGuard,
    max_steps: usize,
    norm: NormKind,
) -> Result<(Vec<PodBasis>, Vec<Vec<f64>>, usize, EnrichmentExit), ActiveError> {
    let mut errors = Vec::with_capacity(bases.len());
    for (s, b) in snapshots.iter().zip(bases) {
        errors.push(pod_errors(s, b, norm)?);
    }
    let mut member = Member {
        index: 0,
        initial: false,
        snapshots: snapshots.to_vec(),
        bases: bases.to_vec(),
        errors,
    };
    let (steps, exit) = enrich(&mut member, others, bound, guard, max_steps, norm)?;
    Ok((member.bases, member.errors, steps, exit))
}

/// `η̂`: the smallest achieved discarded energy over the training set.
pub fn final_energy_criterion(bases: &[&PodBasis]) -> f64 {
    bases
        .iter()
        .map(|b| b.achieved_energy())
        .fold(f64::INFINITY, f64::min)
}

struct Loop<'a, F: FomProvider, C: Clock> {
    fom: &'a F,
    cfg: &'a ActiveLearningConfig,
    clock: &'a C,
    labels: Vec<String>,
    members: Vec<Member>,
    candidates: Vec<usize>,
    history: Vec<IterationRecord>,
    warnings: Vec<Warning>,
    fom_seconds: f64,
}

impl<F: FomProvider, C: Clock> Loop<'_, F, C> {
    fn error_snapshots(&self) -> Vec<Vec<ErrorSnapshot>> {
        self.members
            .iter()
            .map(|m| {
                m.errors
                    .iter()
                    .map(|e| ErrorSnapshot {
                        parameter: self.cfg.candidate_grid[m.index].clone(),
                        errors: e.clone(),
                        norm_kind: self.cfg.norm_kind,
                    })
                    .collect()
            })
            .collect()
    }

    fn estimators(&self) -> Result<Vec<ErrorEstimator>, ActiveError> {
        let snaps = self.error_snapshots();
        (0..self.labels.len())
            .map(|c| {
                let per: Vec<ErrorSnapshot> = snaps.iter().map(|s| s[c].clone()).collect();
                Ok(build_estimator(&per, &self.cfg.kernel, &self.cfg.parameter_space)?)
            })
            .collect()
    }

    fn candidate_estimates(&self, ests: &[ErrorEstimator]) -> Result<Vec<CandidateEstimate>, ActiveError> {
        let q = ests.len() as f64;
        let mut out = Vec::with_capacity(self.candidates.len());
        for &index in &self.candidates {
            let mu = &self.cfg.candidate_grid[index];
            let mut sum = 0.0;
            for e in ests {
                sum += e.estimate(mu)?;
            }
            out.push(CandidateEstimate {
                index,
                estimate: sum / q,
            });
        }
        Ok(out)
    }

    fn check_components(&self, found: usize) -> Result<(), ActiveError> {
        if found != self.labels.len() {
            return Err(ActiveError::ComponentMismatch {
                expected: self.labels.len(),
                found,
            });
        }
        Ok(())
    }

    fn report(&self, terminal: Option<CandidateEstimate>, unreachable: bool, capped: bool) -> ActiveLearningReport {
        let q = self.labels.len();
        let energy_hat = (0..q)
            .map(|c| {
                let bases: Vec<&PodBasis> = self.members.iter().map(|m| &m.bases[c]).collect();
                final_energy_criterion(&bases)
            })
            .collect();
        ActiveLearningReport {
            component_labels: self.labels.clone(),
            tolerance: self.cfg.tolerance,
            initial_energy: self.cfg.initial_energy,
            initial_indices: self.cfg.initial_indices.clone(),
            selected_indices: self.members.iter().filter(|m| !m.initial).map(|m| m.index).collect(),
            history: self.history.clone(),
            terminal_estimate: terminal,
            parameters: self
                .members
                .iter()
                .map(|m| ParameterRecord {
                    index: m.index,
                    parameter: self.cfg.candidate_grid[m.index].clone(),
                    initial: m.initial,
                    ranks: m.bases.iter().map(PodBasis::rank).collect(),
                    max_ranks: m.bases.iter().map(PodBasis::max_rank).collect(),
                    energies: m.bases.iter().map(PodBasis::achieved_energy).collect(),
                    max_errors: m.errors.iter().map(|e| e.iter().copied().fold(0.0, f64::max)).collect(),
                })
                .collect(),
            energy_hat,
            warnings: self.warnings.clone(),
            tolerance_unreachable: unreachable,
            iteration_cap_reached: capped,
            timing: Timing::default(),
        }
    }

    fn fom_failure(&self, index: usize, source: FomError) -> ActiveError {
        ActiveError::FomFailure {
            index,
            source,
            report: Box::new(self.report(None, false, false)),
        }
    }
}

/// Offline phase without timing.
pub fn run_offline<F: FomProvider>(fom: &F, cfg: &ActiveLearningConfig) -> Result<OfflineOutcome, ActiveError> {
    run_offline_timed(fom, cfg, &NoClock)
}

/// Offline phase with a wall-clock breakdown between full-order solves and
/// everything else.
pub fn run_offline_timed<F: FomProvider, C: Clock>(
    fom: &F,
    cfg: &ActiveLearningConfig,
    clock: &C,
) -> Result<OfflineOutcome, ActiveError> {
    cfg.validate()?;
    let start = clock.now();
    let mut lp = Loop {
        fom,
        cfg,
        clock,
        labels: fom.component_labels(),
        members: Vec::new(),
        candidates: (0..cfg.candidate_grid.len())
            .filter(|i| !cfg.initial_indices.contains(i))
            .collect(),
        history: Vec::new(),
        warnings: Vec::new(),
        fom_seconds: 0.0,
    };

    // Initial set.
    let mus: Vec<Vec<f64>> = cfg
        .initial_indices
        .iter()
        .map(|&i| cfg.candidate_grid[i].clone())
        .collect();
    let t0 = lp.clock.now();
    let batch = lp
        .fom
        .solve_batch(&mus, &cfg.time_grid)
        .map_err(|e| lp.fom_failure(cfg.initial_indices[0], e))?;
    lp.fom_seconds += lp.clock.now() - t0;
    for (&index, snaps) in cfg.initial_indices.iter().zip(batch) {
        lp.check_components(snaps.len())?;
        let m = make_member(index, true, snaps, cfg)?;
        lp.members.push(m);
    }

    let max_iterations = cfg.max_iterations.unwrap_or(cfg.candidate_grid.len());
    let mut iteration = 0;
    let mut terminal = None;
    let mut unreachable = false;
    let mut capped = false;

    loop {
        if lp.candidates.is_empty() {
            unreachable = true;
            log::warn!("candidate set exhausted before the tolerance was met");
            break;
        }
        let ests = lp.estimators()?;
        let table = lp.candidate_estimates(&ests)?;
        let pick = select_next(&table)?;
        if !(pick.estimate > cfg.tolerance) {
            terminal = Some(pick);
            break;
        }
        if iteration >= max_iterations {
            capped = true;
            log::warn!("iteration cap {max_iterations} reached");
            break;
        }
        iteration += 1;

        lp.candidates.retain(|&i| i != pick.index);
        let mu = &cfg.candidate_grid[pick.index];
        let t0 = lp.clock.now();
        let snaps = lp
            .fom
            .solve(mu, &cfg.time_grid)
            .map_err(|e| lp.fom_failure(pick.index, e))?;
        lp.fom_seconds += lp.clock.now() - t0;
        lp.check_components(snaps.len())?;

        let mut others = alloc::vec![0.0f64; cfg.time_grid.len()];
        for m in &lp.members {
            for (o, e) in others.iter_mut().zip(m.averaged_errors()) {
                *o = (*o).max(e);
            }
        }
        let previous_max = others.iter().copied().fold(0.0, f64::max);
        let mut member = make_member(pick.index, false, snaps, cfg)?;
        let (steps, exit) = enrich(
            &mut member,
            &others,
            pick.estimate,
            cfg.enrichment_guard,
            cfg.enrichment_cap(),
            cfg.norm_kind,
        )?;
        match exit {
            EnrichmentExit::Satisfied => {}
            EnrichmentExit::RankExhausted => {
                log::warn!("iteration {iteration}: basis of grid index {} exhausted", pick.index);
                lp.warnings.push(Warning::RankExhausted {
                    iteration,
                    index: pick.index,
                });
            }
            EnrichmentExit::StepCap => {
                log::warn!("iteration {iteration}: enrichment cap reached at grid index {}", pick.index);
                lp.warnings.push(Warning::EnrichmentCapReached {
                    iteration,
                    index: pick.index,
                    steps,
                });
            }
        }
        lp.history.push(IterationRecord {
            iteration,
            index: pick.index,
            parameter: mu.clone(),
            estimate: pick.estimate,
            enrichment_steps: steps,
            new_max_error: member.max_averaged_error(),
            previous_max_error: previous_max,
            ranks: member.bases.iter().map(PodBasis::rank).collect(),
            candidates: table,
        });
        lp.members.push(member);
    }

    let estimators = lp.estimators()?;
    let mut report = lp.report(terminal, unreachable, capped);
    let surrogate = TrainedSurrogate::from_snapshots(
        &lp.members.iter().map(|m| m.snapshots.clone()).collect::<Vec<_>>(),
        &report.energy_hat,
        &cfg.kernel,
        &cfg.time_kernel,
        &cfg.parameter_space,
    )?;
    let error_snapshots = lp.error_snapshots();
    let total = clock.now() - start;
    report.timing = Timing {
        fom_seconds: lp.fom_seconds,
        learning_seconds: total - lp.fom_seconds,
        total_seconds: total,
    };
    Ok(OfflineOutcome {
        surrogate,
        report,
        estimators,
        error_snapshots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ce(index: usize, estimate: f64) -> CandidateEstimate {
        CandidateEstimate { index, estimate }
    }

    #[test]
    fn select_argmax_with_tie_rule() {
        assert_eq!(select_next(&[ce(0, 1e-3), ce(1, 5e-2), ce(2, 2e-2)]).unwrap().index, 1);
        assert_eq!(select_next(&[ce(4, 1.0)]).unwrap().index, 4);
        assert_eq!(select_next(&[ce(7, 0.5), ce(3, 0.5)]).unwrap().index, 3);
        assert_eq!(select_next(&[]).unwrap_err(), ActiveError::EmptyCandidateSet);
    }

    #[test]
    fn energy_hat_is_minimum() {
        use crate::linalg::Matrix;
        let a = PodBasis::from_parts(Matrix::identity(2), alloc::vec![2.0, 1.0], Truncation::Rank(1)).unwrap();
        let b = PodBasis::from_parts(Matrix::identity(2), alloc::vec![2.0, 1.0], Truncation::Rank(2)).unwrap();
        assert_eq!(final_energy_criterion(&[&a, &a]), a.achieved_energy());
        assert_eq!(final_energy_criterion(&[&a, &b]), 0.0);
    }
}
