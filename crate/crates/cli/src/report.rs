use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use volterra_core::Trajectory;

use crate::config::{ExperimentConfig, Mode};
use crate::error::CliError;

/// Self-describing result of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub mode: Mode,
    /// The configuration with every default filled in.
    pub config: ExperimentConfig,
    /// Declared checks; the run passes when all are true.
    pub checks: BTreeMap<String, bool>,
    /// Categorical outcomes such as summability or tail verdicts.
    pub verdicts: BTreeMap<String, String>,
    pub statistics: BTreeMap<String, f64>,
    /// Series written as CSV, by name.
    pub series_files: BTreeMap<String, PathBuf>,
    pub wall_clock_seconds: f64,
    pub version: String,
    #[serde(skip)]
    pub series: BTreeMap<String, Trajectory>,
}

impl Report {
    pub fn new(mode: Mode, config: ExperimentConfig) -> Self {
        Self {
            mode,
            config,
            checks: BTreeMap::new(),
            verdicts: BTreeMap::new(),
            statistics: BTreeMap::new(),
            series_files: BTreeMap::new(),
            wall_clock_seconds: 0.0,
            version: env!("CARGO_PKG_VERSION").to_string(),
            series: BTreeMap::new(),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.values().all(|&v| v)
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|(_, &v)| !v)
            .map(|(k, _)| k.as_str())
            .collect()
    }

    pub fn check(&mut self, name: &str, passed: bool) {
        self.checks.insert(name.to_string(), passed);
    }

    pub fn stat(&mut self, name: &str, value: f64) {
        self.statistics.insert(name.to_string(), value);
    }

    pub fn verdict(&mut self, name: &str, value: impl Into<String>) {
        self.verdicts.insert(name.to_string(), value.into());
    }

    pub fn add_series(&mut self, name: &str, t: Trajectory) {
        self.series.insert(name.to_string(), t);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always serialisable")
    }

    /// Writes `report.json` and one `n,value` CSV per series into `dir`.
    pub fn write(&mut self, dir: &Path, write_series: bool) -> Result<(), CliError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| CliError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        if write_series {
            for (name, t) in &self.series {
                let path = dir.join(format!("{name}.csv"));
                std::fs::write(&path, csv(t)).map_err(io(&path))?;
                self.series_files.insert(name.clone(), path);
            }
        }
        let path = dir.join("report.json");
        std::fs::write(&path, self.to_json()).map_err(io(&path))?;
        Ok(())
    }
}

pub fn csv(t: &Trajectory) -> String {
    let mut out = String::with_capacity(t.len() * 24 + 8);
    out.push_str("n,value\n");
    for (n, v) in t.iter() {
        let _ = writeln!(out, "{n},{v:e}");
    }
    out
}
