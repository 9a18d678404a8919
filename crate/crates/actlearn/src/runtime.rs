//! Threads and clocks.

use std::sync::Once;
use std::time::Instant;

use actlearn_core::active::Clock;
use actlearn_core::fom::{FomError, FomProvider};
use actlearn_core::pod::SnapshotMatrix;
use rayon::prelude::*;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "ACTLEARN_THREADS";

static POOL: Once = Once::new();

/// Sizes the global worker pool from `ACTLEARN_THREADS` (all cores when
/// unset or unparsable). Only the first call has an effect.
pub fn init_threads() {
    POOL.call_once(|| {
        let n = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n > 0);
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = n {
            b = b.num_threads(n);
        }
        // Fails only if another pool was installed first; that one is kept.
        if b.build_global().is_err() {
            log::debug!("global thread pool already initialized");
        }
    });
}

/// Wall clock reading seconds since construction.
#[derive(Clone, Copy, Debug)]
pub struct InstantClock {
    origin: Instant,
}

impl InstantClock {
    pub fn new() -> Self {
        Self { origin: Instant::now() }
    }
}

impl Default for InstantClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for InstantClock {
    fn now(&self) -> f64 {
        self.origin.elapsed().as_secs_f64()
    }
}

/// Runs batched full-order solves on the worker pool. Results keep input
/// order, so the outcome does not depend on the thread count.
pub struct ParallelFom<P> {
    inner: P,
}

impl<P> ParallelFom<P> {
    pub fn new(inner: P) -> Self {
        init_threads();
        Self { inner }
    }
}

impl<P: FomProvider + Sync> FomProvider for ParallelFom<P> {
    fn component_labels(&self) -> Vec<String> {
        self.inner.component_labels()
    }

    fn spatial_grid(&self) -> &[f64] {
        self.inner.spatial_grid()
    }

    fn solve(&self, mu: &[f64], time_grid: &[f64]) -> Result<Vec<SnapshotMatrix>, FomError> {
        self.inner.solve(mu, time_grid)
    }

    fn solve_batch(&self, mus: &[Vec<f64>], time_grid: &[f64]) -> Result<Vec<Vec<SnapshotMatrix>>, FomError> {
        mus.par_iter().map(|mu| self.inner.solve(mu, time_grid)).collect()
    }
}
