use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::metrics::MetricReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    #[default]
    Inverter,
    Video,
    Autoencoder,
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskKind::Inverter => "inverter",
            TaskKind::Video => "video",
            TaskKind::Autoencoder => "autoencoder",
        })
    }
}

/// Labelled columns destined for a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub name: String,
    pub labels: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Trace {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            labels: Vec::new(),
            columns: Vec::new(),
        }
    }

    pub fn with(mut self, label: impl Into<String>, column: Vec<f64>) -> Self {
        self.labels.push(label.into());
        self.columns.push(column);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub task: TaskKind,
    pub seed: u64,
    pub metrics: MetricReport,
    /// Task-specific scalars (training error, transition lag, ...).
    pub extra: BTreeMap<String, f64>,
    /// Windowed NRMSE over a free run; empty for tasks without one.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub windows: Vec<f64>,
    #[serde(skip)]
    pub traces: Vec<Trace>,
}

impl TaskReport {
    pub fn new(task: TaskKind, seed: u64, metrics: MetricReport) -> Self {
        Self {
            task,
            seed,
            metrics,
            extra: BTreeMap::new(),
            windows: Vec::new(),
            traces: Vec::new(),
        }
    }
}
