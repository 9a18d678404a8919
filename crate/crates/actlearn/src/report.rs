//! Plot-ready tables and JSON artifacts.

use std::fs;
use std::path::Path;

use actlearn_core::active::ActiveLearningReport;
use serde::Serialize;

use crate::error::{CliError, FormatError};

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// In-memory CSV table with a header row.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<I, S>(header: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<I, S>(&mut self, row: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let row: Vec<String> = row.into_iter().map(Into::into).collect();
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k].as_str()).collect())
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let csv_err = |source| FormatError::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(&self.header).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.flush().map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let csv_err = |source| FormatError::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
        let header = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec.map_err(csv_err)?.iter().map(String::from).collect());
        }
        Ok(Self { header, rows })
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| FormatError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// One row per training parameter: final ranks, energies and POD errors.
pub fn parameter_table(report: &ActiveLearningReport) -> CsvTable {
    let mut header = vec!["index".to_string(), "parameter".into(), "initial".into()];
    for l in &report.component_labels {
        header.extend([
            format!("rank_{l}"),
            format!("max_rank_{l}"),
            format!("energy_{l}"),
            format!("max_error_{l}"),
        ]);
    }
    let mut t = CsvTable::new(header);
    for p in &report.parameters {
        let mut row = vec![p.index.to_string(), fmt_f64(p.parameter[0]), p.initial.to_string()];
        for c in 0..report.component_labels.len() {
            row.extend([
                p.ranks[c].to_string(),
                p.max_ranks[c].to_string(),
                fmt_f64(p.energies[c]),
                fmt_f64(p.max_errors[c]),
            ]);
        }
        t.push(row);
    }
    t
}

/// One row per loop iteration.
pub fn history_table(report: &ActiveLearningReport) -> CsvTable {
    let mut header: Vec<String> = [
        "iteration",
        "index",
        "parameter",
        "estimate",
        "enrichment_steps",
        "new_max_error",
        "previous_max_error",
    ]
    .map(String::from)
    .into();
    header.extend(report.component_labels.iter().map(|l| format!("rank_{l}")));
    let mut t = CsvTable::new(header);
    for h in &report.history {
        let mut row = vec![
            h.iteration.to_string(),
            h.index.to_string(),
            fmt_f64(h.parameter[0]),
            fmt_f64(h.estimate),
            h.enrichment_steps.to_string(),
            fmt_f64(h.new_max_error),
            fmt_f64(h.previous_max_error),
        ];
        row.extend(h.ranks.iter().map(|r| r.to_string()));
        t.push(row);
    }
    t
}

/// Estimate of every remaining candidate at every iteration.
pub fn candidate_table(report: &ActiveLearningReport, grid: &[Vec<f64>]) -> CsvTable {
    let mut t = CsvTable::new(["iteration", "index", "parameter", "estimate", "selected"]);
    for h in &report.history {
        for c in &h.candidates {
            t.push([
                h.iteration.to_string(),
                c.index.to_string(),
                fmt_f64(grid[c.index][0]),
                fmt_f64(c.estimate),
                (c.index == h.index).to_string(),
            ]);
        }
    }
    t
}
