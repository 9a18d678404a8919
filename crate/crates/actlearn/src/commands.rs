//! The CLI verbs as library functions. Each writes its artifacts into the
//! configured output directory and returns a summary.

use std::fs;
use std::path::{Path, PathBuf};

use actlearn_core::active::ActiveLearningReport;
use actlearn_core::fom::FomProvider;
use actlearn_core::NormKind;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::harness::{self, fom_for, Comparison, TestError, TimingReport};
use crate::model::ModelFile;
use crate::report::{candidate_table, fmt_f64, history_table, parameter_table, write_json, CsvTable};
use crate::snapshot_file;

pub const MODEL_FILE: &str = "model.json";
pub const REPORT_FILE: &str = "report.json";
pub const MANIFEST_FILE: &str = "manifest.json";

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Files written by one command, relative to its output directory.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub files: Vec<String>,
}

struct Output {
    dir: PathBuf,
    manifest: Manifest,
}

impl Output {
    fn new(dir: &Path, command: &str) -> Result<Self, CliError> {
        ensure_dir(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest: Manifest {
                command: command.into(),
                files: Vec::new(),
            },
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.manifest.files.push(name.into());
        self.dir.join(name)
    }

    fn finish(self) -> Result<Manifest, CliError> {
        write_json(&self.dir.join(MANIFEST_FILE), &self.manifest)?;
        Ok(self.manifest)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotsSummary {
    pub files: Vec<PathBuf>,
}

/// Writes one snapshot file per (parameter, component). `parameters`
/// defaults to the whole candidate grid.
pub fn cmd_snapshots(cfg: &RunConfig, parameters: Option<Vec<f64>>, csv: bool) -> Result<SnapshotsSummary, CliError> {
    cfg.validate()?;
    let fom = fom_for(&cfg.fom)?;
    let (names, mus): (Vec<String>, Vec<Vec<f64>>) = match parameters {
        Some(ps) => ps.into_iter().enumerate().map(|(k, p)| (format!("p{k:04}"), vec![p])).unzip(),
        None => cfg
            .candidate_grid()
            .into_iter()
            .enumerate()
            .map(|(k, p)| (format!("g{k:04}"), p))
            .unzip(),
    };
    if let Some(mu) = mus.iter().find(|m| !(m[0] > 0.0 && m[0].is_finite())) {
        return Err(CliError::Config(format!("parameter {} is not a positive viscosity", mu[0])));
    }
    let mut out = Output::new(&cfg.output_dir, "snapshots")?;
    let solved = fom.solve_batch(&mus, &cfg.time_grid())?;
    let mut files = Vec::new();
    for (name, comps) in names.iter().zip(&solved) {
        for s in comps {
            let path = out.path(&format!("snap_{name}_{}.bin", s.label()));
            snapshot_file::save(&path, s)?;
            files.push(path);
            if csv {
                let path = out.path(&format!("snap_{name}_{}.csv", s.label()));
                snapshot_file::csv_table(s, fom.spatial_grid()).write(&path)?;
            }
        }
    }
    let mut index = CsvTable::new(["name", "parameter"]);
    for (name, mu) in names.iter().zip(&mus) {
        index.push([name.clone(), fmt_f64(mu[0])]);
    }
    index.write(&out.path("snapshots.csv"))?;
    out.finish()?;
    Ok(SnapshotsSummary { files })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainSummary {
    pub report: ActiveLearningReport,
    pub test_errors: Vec<TestError>,
    pub manifest: Manifest,
}

/// Runs the offline phase and persists the model, the report and its tables.
pub fn cmd_train(cfg: &RunConfig) -> Result<TrainSummary, CliError> {
    let outcome = harness::train(cfg)?;
    let mut out = Output::new(&cfg.output_dir, "train")?;
    let model = ModelFile::new(
        cfg.fom.clone(),
        cfg.norm,
        outcome.surrogate.clone(),
        outcome.estimators.clone(),
    );
    model.save(&out.path(MODEL_FILE))?;
    write_json(&out.path(REPORT_FILE), &outcome.report)?;
    cfg.save(&out.path("config.json"))?;
    parameter_table(&outcome.report).write(&out.path("parameters.csv"))?;
    history_table(&outcome.report).write(&out.path("history.csv"))?;
    candidate_table(&outcome.report, &cfg.candidate_grid()).write(&out.path("candidates.csv"))?;
    let test_errors = harness::test_errors(cfg, &outcome)?;
    if !test_errors.is_empty() {
        let mut t = CsvTable::new(["parameter", "component", "mean_error", "max_error", "estimate"]);
        for e in &test_errors {
            t.push([
                fmt_f64(e.parameter),
                e.component.clone(),
                fmt_f64(e.mean_error),
                fmt_f64(e.max_error),
                fmt_f64(e.estimate),
            ]);
        }
        t.write(&out.path("test_errors.csv"))?;
    }
    Ok(TrainSummary {
        report: outcome.report,
        test_errors,
        manifest: out.finish()?,
    })
}

/// Query times: a single `t*`, an explicit list, or the training grid.
#[derive(Clone, Debug, PartialEq)]
pub enum QueryTimes {
    Single(f64),
    List(Vec<f64>),
    TrainingGrid,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuerySummary {
    pub times: Vec<f64>,
    pub ranks: Vec<usize>,
    pub extrapolated: bool,
    pub estimate: Option<f64>,
    /// Per component, per time; present with `truth`.
    pub errors: Option<Vec<Vec<f64>>>,
}

/// Evaluates a stored surrogate at `μ*` and writes `solution.csv`, plus
/// `errors.csv` against the full-order model when `truth` is set.
pub fn cmd_query(
    model_path: &Path,
    mu: &[f64],
    times: QueryTimes,
    truth: bool,
    norm: Option<NormKind>,
    out_dir: &Path,
) -> Result<QuerySummary, CliError> {
    let model = ModelFile::load(model_path)?;
    let s = &model.surrogate;
    let times = match times {
        QueryTimes::Single(t) => vec![t],
        QueryTimes::List(v) => v,
        QueryTimes::TrainingGrid => s.time_grid().to_vec(),
    };
    if times.is_empty() {
        return Err(CliError::Config("no query times".into()));
    }
    let tr = s.query_trajectory(mu, &times)?;
    let fom = fom_for(&model.fom)?;
    let x = fom.spatial_grid();
    let labels = s.component_labels();

    let mut out = Output::new(out_dir, "query")?;
    let mut header = vec!["t".to_string(), "node".into(), "x".into()];
    header.extend(labels.iter().cloned());
    let mut sol = CsvTable::new(header);
    for (k, &t) in times.iter().enumerate() {
        for (i, &xi) in x.iter().enumerate() {
            let mut row = vec![fmt_f64(t), i.to_string(), fmt_f64(xi)];
            row.extend(tr.solutions.iter().map(|m| fmt_f64(m[(i, k)])));
            sol.push(row);
        }
    }
    sol.write(&out.path("solution.csv"))?;

    let errors = if truth {
        let exact = harness::truth(&fom, mu, &times)?;
        let errs = harness::trajectory_errors(s, &exact, mu, &times, norm.unwrap_or(model.norm))?;
        let mut header = vec!["t".to_string()];
        header.extend(labels.iter().map(|l| format!("error_{l}")));
        let mut t = CsvTable::new(header);
        for (k, &tk) in times.iter().enumerate() {
            let mut row = vec![fmt_f64(tk)];
            row.extend(errs.iter().map(|e| fmt_f64(e[k])));
            t.push(row);
        }
        t.write(&out.path("errors.csv"))?;
        Some(errs)
    } else {
        None
    };
    out.finish()?;
    Ok(QuerySummary {
        times,
        ranks: tr.ranks,
        extrapolated: tr.extrapolated,
        estimate: model.estimate(mu)?,
        errors,
    })
}

/// Active learning against random and quasi-random sampling; writes
/// `comparison.csv` and `comparison.json`.
pub fn cmd_compare_sampling(cfg: &RunConfig) -> Result<Comparison, CliError> {
    if cfg.test_parameters.is_empty() {
        return Err(CliError::Config("compare-sampling needs test_parameters".into()));
    }
    if cfg.seeds.is_empty() {
        return Err(CliError::Config("compare-sampling needs at least one seed".into()));
    }
    let active = harness::train(cfg)?;
    let cmp = harness::compare_sampling(cfg, &active)?;
    let mut out = Output::new(&cfg.output_dir, "compare-sampling")?;
    let mut t = CsvTable::new(["strategy", "seed", "budget", "component", "test_parameter", "error", "estimate"]);
    for r in &cmp.rows {
        t.push([
            r.strategy.name().to_string(),
            r.seed.map_or_else(String::new, |s| s.to_string()),
            r.budget.to_string(),
            r.component.clone(),
            fmt_f64(r.test_parameter),
            fmt_f64(r.error),
            fmt_f64(r.estimate),
        ]);
    }
    t.write(&out.path("comparison.csv"))?;
    write_json(&out.path("comparison.json"), &cmp)?;
    out.finish()?;
    Ok(cmp)
}

/// Averaged phase timings; writes `timings.json` and `timings.csv`.
pub fn cmd_timings(cfg: &RunConfig) -> Result<TimingReport, CliError> {
    let rep = harness::timings(cfg)?;
    let mut out = Output::new(&cfg.output_dir, "timings")?;
    write_json(&out.path("timings.json"), &rep)?;
    let mut t = CsvTable::new([
        "run",
        "fom_seconds",
        "offline_fom_seconds",
        "offline_learning_seconds",
        "online_seconds",
    ]);
    for (k, r) in rep.runs.iter().enumerate() {
        t.push([
            (k + 1).to_string(),
            fmt_f64(r.fom_seconds),
            fmt_f64(r.offline_fom_seconds),
            fmt_f64(r.offline_learning_seconds),
            fmt_f64(r.online_seconds),
        ]);
    }
    t.write(&out.path("timings.csv"))?;
    out.finish()?;
    Ok(rep)
}
