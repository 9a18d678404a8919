//! Run configuration: one JSON document describing the problem, the
//! candidate grid, the offline loop and the evaluation harness.

use std::fs;
use std::path::{Path, PathBuf};

use actlearn_core::active::{ActiveLearningConfig, EnrichmentGuard};
use actlearn_core::fom::{BurgersConfig, FomConfig, SweConfig};
use actlearn_core::grid::{linspace, log_uniform, uniform_time_grid, AxisTransform, ParameterSpace};
use actlearn_core::ksnn::{KernelChoice, KernelKind};
use actlearn_core::NormKind;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, FormatError};

/// Candidate parameter values along the single viscosity axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub end: f64,
    pub count: usize,
    /// Space the values uniformly in `log10` rather than linearly.
    #[serde(default)]
    pub log_uniform: bool,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.log_uniform {
            log_uniform(self.start, self.end, self.count)
        } else {
            linspace(self.start, self.end, self.count)
        }
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        self.values().into_iter().map(|v| vec![v]).collect()
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.count < 2 {
            return Err(CliError::Config("parameter grid needs at least 2 values".into()));
        }
        if !(self.start.is_finite() && self.end.is_finite() && self.start < self.end) {
            return Err(CliError::Config("parameter grid needs finite start < end".into()));
        }
        if self.log_uniform && self.start <= 0.0 {
            return Err(CliError::Config("log-uniform grid needs a positive start".into()));
        }
        Ok(())
    }
}

/// Uniform training time grid on `[0, t_end]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub t_end: f64,
    pub steps: usize,
}

impl TimeSpec {
    pub fn grid(&self) -> Vec<f64> {
        uniform_time_grid(self.t_end, self.steps)
    }
}

/// `count` evaluation times `start, start + step, ...`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestTimes {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl TestTimes {
    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.start + self.step * k as f64).collect()
    }
}

fn default_transform() -> AxisTransform {
    AxisTransform::Log10
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_timing_runs() -> usize {
    3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub fom: FomConfig,
    pub parameter_grid: GridSpec,
    pub time: TimeSpec,
    /// Indices into the parameter grid forming the initial training set.
    pub initial_indices: Vec<usize>,
    pub tolerance: f64,
    /// Discarded-energy level of freshly computed POD bases.
    pub initial_energy: f64,
    #[serde(default)]
    pub norm: NormKind,
    /// Parameter-space kernel (surrogate and estimator).
    #[serde(default)]
    pub kernel: KernelChoice,
    #[serde(default)]
    pub time_kernel: KernelChoice,
    /// Coordinates the parameter-space networks measure distances in.
    #[serde(default = "default_transform")]
    pub parameter_transform: AxisTransform,
    #[serde(default)]
    pub max_iterations: Option<usize>,
    #[serde(default)]
    pub max_enrichment_steps: Option<usize>,
    #[serde(default)]
    pub enrichment_guard: EnrichmentGuard,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Seeds of the random-sampling comparison.
    #[serde(default)]
    pub seeds: Vec<u64>,
    /// Random-sampling budgets. Empty means `|initial| + ⌈selected / 2⌉`.
    #[serde(default)]
    pub budgets: Vec<usize>,
    /// Held-out parameters for error tables.
    #[serde(default)]
    pub test_parameters: Vec<Vec<f64>>,
    /// Evaluation times for error tables; the training grid when absent.
    #[serde(default)]
    pub test_times: Option<TestTimes>,
    #[serde(default = "default_timing_runs")]
    pub timing_runs: usize,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        // Malformed JSON is a configuration problem, not an IO one.
        let cfg = Self::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, self.to_json()).map_err(|e| CliError::io(path, e))
    }

    pub fn candidate_grid(&self) -> Vec<Vec<f64>> {
        self.parameter_grid.points()
    }

    pub fn time_grid(&self) -> Vec<f64> {
        self.time.grid()
    }

    pub fn parameter_space(&self) -> ParameterSpace {
        ParameterSpace::uniform(self.parameter_transform, 1)
    }

    pub fn evaluation_times(&self) -> Vec<f64> {
        match &self.test_times {
            Some(t) => t.values(),
            None => self.time_grid(),
        }
    }

    pub fn active_config(&self) -> ActiveLearningConfig {
        ActiveLearningConfig {
            candidate_grid: self.candidate_grid(),
            initial_indices: self.initial_indices.clone(),
            time_grid: self.time_grid(),
            tolerance: self.tolerance,
            initial_energy: self.initial_energy,
            norm_kind: self.norm,
            kernel: self.kernel,
            time_kernel: self.time_kernel,
            parameter_space: self.parameter_space(),
            max_iterations: self.max_iterations,
            max_enrichment_steps: self.max_enrichment_steps,
            enrichment_guard: self.enrichment_guard,
        }
    }

    /// Checks every nested invariant before anything is computed.
    pub fn validate(&self) -> Result<(), CliError> {
        self.fom.validate()?;
        self.parameter_grid.validate()?;
        if !(self.time.t_end > 0.0 && self.time.t_end.is_finite()) || self.time.steps == 0 {
            return Err(CliError::Config("time grid needs t_end > 0 and at least one step".into()));
        }
        self.active_config().validate()?;
        for (kernel, what) in [(&self.kernel, "kernel"), (&self.time_kernel, "time_kernel")] {
            if let Some(e) = kernel.shape_factor {
                if !(e > 0.0 && e.is_finite()) {
                    return Err(CliError::Config(format!("{what} shape factor must be positive")));
                }
            }
        }
        if let Some(mu) = self.test_parameters.iter().find(|p| p.len() != 1 || !(p[0] > 0.0)) {
            return Err(CliError::Config(format!("test parameter {mu:?} is not a positive viscosity")));
        }
        if let Some(t) = &self.test_times {
            let grid = self.time_grid();
            let slack = grid[1] - grid[0];
            let vals = t.values();
            if t.count == 0 || vals.iter().any(|&x| !(x >= -slack && x <= self.time.t_end + slack)) {
                return Err(CliError::Config("test times must lie in the training time range".into()));
            }
        }
        let n = self.parameter_grid.count;
        if let Some(b) = self.budgets.iter().find(|&&b| b < 2 || b > n) {
            return Err(CliError::Config(format!("budget {b} outside [2, {n}]")));
        }
        if self.timing_runs == 0 {
            return Err(CliError::Config("timing_runs must be at least 1".into()));
        }
        Ok(())
    }

    /// Command-line overrides shared by every verb.
    pub fn apply_overrides(&mut self, o: &Overrides) -> Result<(), CliError> {
        if let Some(out) = &o.out {
            self.output_dir = out.clone();
        }
        if let Some(seed) = o.seed {
            self.seeds = vec![seed];
        }
        if let Some(norm) = &o.norm {
            self.norm = NormKind::from_name(norm)
                .ok_or_else(|| CliError::Config(format!("unknown norm `{norm}`")))?;
        }
        if let Some(kernel) = &o.kernel {
            self.kernel.kind = KernelKind::from_name(kernel)
                .ok_or_else(|| CliError::Config(format!("unknown kernel `{kernel}`")))?;
        }
        if let Some(eps) = o.shape_factor {
            self.kernel.shape_factor = Some(eps);
        }
        self.validate()
    }
}

#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub norm: Option<String>,
    pub kernel: Option<String>,
    pub shape_factor: Option<f64>,
}

/// Viscous Burgers with exact solution: 150 nodes, 100 steps on `[0, 2]`,
/// `Re ∈ [10, 5500]` log-spaced (100 values), 21 initial samples.
pub fn burgers_preset() -> RunConfig {
    let mut initial = vec![0, 99];
    initial.extend((10..=90).step_by(10));
    initial.extend((5..=95).step_by(10));
    RunConfig {
        fom: FomConfig::Burgers(BurgersConfig { grid_nodes: 150 }),
        parameter_grid: GridSpec {
            start: 1.0 / 5500.0,
            end: 0.1,
            count: 100,
            log_uniform: true,
        },
        time: TimeSpec { t_end: 2.0, steps: 100 },
        initial_indices: initial,
        tolerance: 1e-2,
        initial_energy: 1e-4,
        norm: NormKind::L2,
        kernel: KernelChoice::default(),
        time_kernel: KernelChoice::default(),
        parameter_transform: AxisTransform::Log10,
        max_iterations: None,
        max_enrichment_steps: None,
        enrichment_guard: EnrichmentGuard::default(),
        output_dir: default_output_dir(),
        seeds: vec![10, 20, 30, 40],
        budgets: Vec::new(),
        test_parameters: [40.0, 100.0, 350.0, 1250.0, 3000.0].iter().map(|re| vec![1.0 / re]).collect(),
        test_times: Some(TestTimes {
            start: 0.01,
            step: 0.02,
            count: 99,
        }),
        timing_runs: 3,
    }
}

/// Shallow water at desk scale: 201 nodes, 200 steps on `[0, 2]`,
/// `ν ∈ [1e-5, 1]` log-spaced (50 values), 11 initial samples.
pub fn swe_desk_preset() -> RunConfig {
    let mut initial = vec![0, 49];
    initial.extend((5..=45).step_by(5));
    RunConfig {
        fom: FomConfig::Swe(SweConfig {
            nodes: 201,
            ..SweConfig::default()
        }),
        parameter_grid: GridSpec {
            start: 1e-5,
            end: 1.0,
            count: 50,
            log_uniform: true,
        },
        time: TimeSpec { t_end: 2.0, steps: 200 },
        initial_indices: initial,
        tolerance: 1e-2,
        initial_energy: 1e-5,
        norm: NormKind::L2,
        kernel: KernelChoice::default(),
        time_kernel: KernelChoice::default(),
        parameter_transform: AxisTransform::Log10,
        max_iterations: None,
        max_enrichment_steps: None,
        enrichment_guard: EnrichmentGuard::default(),
        output_dir: default_output_dir(),
        seeds: vec![10, 20, 30, 40],
        budgets: Vec::new(),
        test_parameters: [5e-1, 5e-2, 5e-3, 5e-4, 5e-5].iter().map(|&nu| vec![nu]).collect(),
        test_times: Some(TestTimes {
            start: 0.004,
            step: 0.004,
            count: 499,
        }),
        timing_runs: 3,
    }
}

/// The desk shallow-water study on the full 601-node grid.
pub fn swe_full_preset() -> RunConfig {
    let mut cfg = swe_desk_preset();
    cfg.fom = FomConfig::Swe(SweConfig::default());
    cfg
}

/// Reads a JSON file into `T`, mapping parse failures to [`FormatError`].
pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| {
        FormatError::Json {
            path: path.to_path_buf(),
            source,
        }
        .into()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for cfg in [burgers_preset(), swe_desk_preset(), swe_full_preset()] {
            cfg.validate().unwrap();
        }
    }

    #[test]
    fn burgers_grid_matches_reynolds_range() {
        let cfg = burgers_preset();
        let g = cfg.parameter_grid.values();
        assert_eq!(g.len(), 100);
        assert!((1.0 / g[0] - 5500.0).abs() < 1e-8);
        assert!((1.0 / g[99] - 10.0).abs() < 1e-12);
        assert_eq!(cfg.initial_indices.len(), 21);
        assert_eq!(cfg.time_grid().len(), 101);
        let t = cfg.evaluation_times();
        assert_eq!(t.len(), 99);
        assert!((t[98] - 1.97).abs() < 1e-12);
    }

    #[test]
    fn defaults_fill_optional_fields() {
        let text = r#"{
            "fom": {"problem": "burgers", "grid_nodes": 20},
            "parameter_grid": {"start": 0.001, "end": 0.1, "count": 10, "log_uniform": true},
            "time": {"t_end": 1.0, "steps": 10},
            "initial_indices": [0, 9],
            "tolerance": 0.01,
            "initial_energy": 0.0001
        }"#;
        let cfg = RunConfig::from_json(text).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.parameter_transform, AxisTransform::Log10);
        assert_eq!(cfg.norm, NormKind::L2);
        assert_eq!(cfg.kernel.kind, KernelKind::Multiquadric);
        assert_eq!(cfg.timing_runs, 3);
        assert_eq!(cfg.evaluation_times().len(), 11);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&burgers_preset().to_json()).unwrap();
        v["tolerence"] = 0.1.into();
        assert!(RunConfig::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn validation_failures() {
        let mut c = burgers_preset();
        c.initial_indices = vec![0, 100];
        assert!(c.validate().is_err());
        let mut c = burgers_preset();
        c.parameter_grid.start = 0.0;
        assert!(c.validate().is_err());
        let mut c = burgers_preset();
        c.test_times = Some(TestTimes { start: 0.0, step: 1.0, count: 5 });
        assert!(c.validate().is_err());
        let mut c = burgers_preset();
        c.budgets = vec![101];
        assert!(c.validate().is_err());
        let mut c = burgers_preset();
        c.kernel.shape_factor = Some(-1.0);
        assert!(c.validate().is_err());
    }

    #[test]
    fn overrides_apply() {
        let mut c = burgers_preset();
        c.apply_overrides(&Overrides {
            out: Some("elsewhere".into()),
            seed: Some(7),
            norm: Some("linf".into()),
            kernel: Some("gaussian".into()),
            shape_factor: Some(0.5),
        })
        .unwrap();
        assert_eq!(c.output_dir, PathBuf::from("elsewhere"));
        assert_eq!(c.seeds, vec![7]);
        assert_eq!(c.norm, NormKind::Linf);
        assert_eq!(c.kernel, KernelChoice { kind: KernelKind::Gaussian, shape_factor: Some(0.5) });
        let bad = Overrides {
            norm: Some("l3".into()),
            ..Overrides::default()
        };
        assert!(matches!(c.apply_overrides(&bad), Err(CliError::Config(_))));
    }
}
