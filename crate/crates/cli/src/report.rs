use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{io_err, Result};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// One pass/fail assertion of an experiment.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: Value,
    pub expected: String,
    pub passed: bool,
}

impl Check {
    pub fn below(name: &str, value: f64, limit: f64) -> Self {
        Self::number(name, value, format!("< {limit:e}"), value < limit)
    }

    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self::number(name, value, format!("<= {limit}"), value <= limit)
    }

    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Self::number(name, value, format!(">= {limit}"), value >= limit)
    }

    pub fn within(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Self::number(name, value, format!("in [{lo}, {hi}]"), (lo..=hi).contains(&value))
    }

    pub fn equals<T: Serialize + PartialEq>(name: &str, value: T, want: T) -> Self {
        let passed = value == want;
        let expected = serde_json::to_string(&want).unwrap_or_default();
        Self { name: name.into(), value: serde_json::to_value(value).unwrap_or(Value::Null), expected, passed }
    }

    fn number(name: &str, value: f64, expected: String, passed: bool) -> Self {
        Self { name: name.into(), value: serde_json::json!(value), expected, passed }
    }
}

/// Everything an experiment hands back: checks, measured results and the CSV files it wrote.
#[derive(Debug, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub results: serde_json::Map<String, Value>,
    pub files: Vec<String>,
}

impl Outcome {
    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn record(&mut self, key: &str, v: impl Serialize) {
        self.results.insert(key.into(), serde_json::to_value(v).unwrap_or(Value::Null));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Serialize)]
pub struct Report<'a> {
    pub schema_version: u32,
    pub experiment: &'a str,
    pub seed: u64,
    pub config: Value,
    pub constants: Value,
    pub passed: bool,
    pub checks: &'a [Check],
    pub results: &'a serde_json::Map<String, Value>,
    pub files: &'a [String],
}

/// Run facts that differ between identical runs; kept out of `report.json`.
#[derive(Debug, Serialize)]
pub struct Metadata {
    pub experiment: String,
    pub config_path: String,
    pub started_unix_seconds: u64,
    pub runtime_seconds: f64,
    pub version: &'static str,
}

pub fn write_json(path: &Path, v: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v).expect("reports serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(io_err(path))
}
