//! Experiment runner for the Fueter/bubbling laboratory.
//!
//! Each named experiment reads a TOML config, writes `report.json` (deterministic) and
//! `metadata.json` (timestamps) plus CSV fields into the output directory.

pub mod calibrate;
pub mod config;
pub mod constants;
pub mod error;
pub mod experiments;
pub mod report;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

pub use config::ExperimentConfig;
pub use constants::{Constants, ConstantsFile};
pub use error::{CliError, Result};
pub use experiments::{find_experiment, list_experiments, Experiment};
pub use report::{Check, Outcome};

/// Exit status of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Passed,
    Failed,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Passed => 0,
            Status::Failed => 1,
        }
    }
}

/// What the caller needs after a run: status, output directory and the checks.
#[derive(Debug)]
pub struct RunSummary {
    pub status: Status,
    pub out_dir: PathBuf,
    pub checks: Vec<Check>,
}

/// Shared state handed to an experiment.
pub struct Context<'a> {
    pub config: &'a ExperimentConfig,
    pub constants: Constants,
    pub out_dir: &'a Path,
}

impl Context<'_> {
    pub fn out_file(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

/// Loads `config_path`, runs its experiment and writes the report files.
///
/// The output directory is `out_override`, else the config's `output_dir` (relative to the working
/// directory), else `runs/<experiment>`.
pub fn run(config_path: &Path, out_override: Option<&Path>) -> Result<RunSummary> {
    let config = ExperimentConfig::load(config_path)?;
    let exp = find_experiment(&config.experiment)?;
    exp.check_params(&config)?;
    let base = match &config.constants_file {
        Some(p) => {
            let p = config_path.parent().unwrap_or(Path::new(".")).join(p);
            ConstantsFile::load(&p)?
        }
        None => ConstantsFile::builtin(),
    };
    let constants = config.constants(base.constants);
    let out_dir = match (out_override, &config.output_dir) {
        (Some(o), _) => o.to_path_buf(),
        (None, Some(o)) => o.clone(),
        (None, None) => PathBuf::from("runs").join(exp.name),
    };
    std::fs::create_dir_all(&out_dir).map_err(error::io_err(&out_dir))?;

    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let clock = Instant::now();
    let ctx = Context { config: &config, constants, out_dir: &out_dir };
    let outcome = (exp.run)(&ctx)?;
    let runtime = clock.elapsed().as_secs_f64();

    let passed = outcome.passed();
    let report = report::Report {
        schema_version: report::REPORT_SCHEMA_VERSION,
        experiment: exp.name,
        seed: config.seed,
        config: serde_json::to_value(&config).expect("config serializes"),
        constants: serde_json::to_value(constants).expect("constants serialize"),
        passed,
        checks: &outcome.checks,
        results: &outcome.results,
        files: &outcome.files,
    };
    report::write_json(&out_dir.join("report.json"), &report)?;
    let meta = report::Metadata {
        experiment: exp.name.into(),
        config_path: config_path.display().to_string(),
        started_unix_seconds: started,
        runtime_seconds: runtime,
        version: env!("CARGO_PKG_VERSION"),
    };
    report::write_json(&out_dir.join("metadata.json"), &meta)?;
    Ok(RunSummary { status: if passed { Status::Passed } else { Status::Failed }, out_dir, checks: outcome.checks })
}
