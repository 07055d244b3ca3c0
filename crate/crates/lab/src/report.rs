use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use cbi_core::scalar::extended;
use serde::Serialize;

/// One assertion of an experiment.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    #[serde(with = "extended")]
    pub value: f64,
    #[serde(with = "extended")]
    pub target: f64,
    #[serde(with = "extended")]
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl Check {
    /// `|value - target| <= tolerance`.
    pub fn absolute(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        let passed = (value - target).abs() <= tolerance;
        Self::new(name, value, target, tolerance, passed)
    }

    /// `|value / target - 1| <= tolerance`.
    pub fn relative(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        let passed = ((value - target) / target).abs() <= tolerance;
        Self::new(name, value, target, tolerance, passed)
    }

    /// `value <= bound`; the tolerance field carries the slack already
    /// folded into `bound`.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::new(name, value, bound, 0.0, value <= bound)
    }

    pub fn flag(name: impl Into<String>, passed: bool, note: impl Into<String>) -> Self {
        let mut c = Self::new(name, f64::from(u8::from(passed)), 1.0, 0.0, passed);
        c.note = note.into();
        c
    }

    fn new(name: impl Into<String>, value: f64, target: f64, tolerance: f64, passed: bool) -> Self {
        Self {
            name: name.into(),
            value,
            target,
            tolerance,
            passed,
            note: String::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    #[serde(skip)]
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub experiment: String,
    pub config_hash: String,
    pub seed: u64,
    pub versions: BTreeMap<&'static str, &'static str>,
    pub model: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub summary: serde_json::Map<String, serde_json::Value>,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new(experiment: &str, config_hash: String, seed: u64, model: String) -> Self {
        let versions = BTreeMap::from([
            ("cbi-core", cbi_core::VERSION),
            ("cbi-lab", env!("CARGO_PKG_VERSION")),
        ]);
        Self {
            experiment: experiment.to_string(),
            config_hash,
            seed,
            versions,
            model,
            passed: true,
            checks: Vec::new(),
            summary: serde_json::Map::new(),
            tables: Vec::new(),
        }
    }

    pub fn check(&mut self, check: Check) {
        self.passed &= check.passed;
        self.checks.push(check);
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("summary values serialize");
        self.summary.insert(key.to_string(), v);
    }

    /// Numbers that may be infinite, stored as `"inf"` rather than `null`.
    pub fn note_number(&mut self, key: &str, value: f64) {
        let v = if value.is_finite() {
            serde_json::json!(value)
        } else if value.is_nan() {
            serde_json::Value::Null
        } else if value > 0.0 {
            serde_json::json!("inf")
        } else {
            serde_json::json!("-inf")
        };
        self.summary.insert(key.to_string(), v);
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// `<dir>/<experiment>_<table>.csv` per table and `<dir>/summary.json`.
    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for table in &self.tables {
            let path = dir.join(format!("{}_{}.csv", self.experiment, table.name));
            let mut file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            writeln!(file, "# experiment={} config_hash={} seed={}", self.experiment, self.config_hash, self.seed)?;
            for line in self.model.lines() {
                writeln!(file, "# model: {line}")?;
            }
            let mut w = csv::Writer::from_writer(file);
            w.write_record(&table.columns)?;
            for row in &table.rows {
                w.write_record(row.iter().map(|v| v.to_string()))?;
            }
            w.flush()?;
        }
        let path = dir.join("summary.json");
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        serde_json::to_writer_pretty(file, self)?;
        Ok(())
    }
}
