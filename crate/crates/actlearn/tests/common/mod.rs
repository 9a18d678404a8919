#![allow(dead_code)]

use std::path::Path;

use actlearn::config::{GridSpec, TimeSpec};
use actlearn::RunConfig;
use actlearn_core::fom::{BurgersConfig, FomConfig};

/// Burgers study small enough for debug-build tests.
pub fn small_burgers(out: &Path) -> RunConfig {
    let mut cfg = actlearn::config::burgers_preset();
    cfg.fom = FomConfig::Burgers(BurgersConfig { grid_nodes: 40 });
    cfg.parameter_grid = GridSpec {
        start: 1.0 / 500.0,
        end: 0.1,
        count: 10,
        log_uniform: true,
    };
    cfg.time = TimeSpec { t_end: 2.0, steps: 20 };
    cfg.initial_indices = vec![0, 9, 5];
    cfg.tolerance = 5e-2;
    cfg.initial_energy = 1e-3;
    cfg.seeds = vec![1, 2];
    cfg.test_parameters = vec![vec![0.01]];
    cfg.test_times = None;
    cfg.timing_runs = 1;
    cfg.output_dir = out.to_path_buf();
    cfg
}
