use std::path::{Path, PathBuf};
use std::sync::Arc;

use fueter_core::hk::{eguchi_hanson_target, flat_quaternion_target, TargetChart};
use serde::{Deserialize, Serialize};

use crate::constants::Constants;
use crate::error::{input, io_err, CliError, Result};

/// One experiment run, as read from a TOML file.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Constants file replacing the built-in defaults, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants_file: Option<PathBuf>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub target: TargetSection,
    #[serde(default)]
    pub sequence: SequenceSection,
    #[serde(default)]
    pub thresholds: Thresholds,
    /// Experiment-specific knobs; each experiment declares the keys it accepts.
    #[serde(default)]
    pub params: toml::Table,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub h: Option<f64>,
    pub extent: Option<f64>,
    pub cell_size: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    /// `flat-h`, `flat-t4` or `eguchi-hanson`.
    pub name: Option<String>,
    /// Eguchi–Hanson scale `a`.
    pub scale: Option<f64>,
    /// Quaternionic dimension of a flat target.
    pub dim: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSection {
    /// `λ_i = 2^{−i}` for `i = 0..=levels`.
    pub levels: Option<usize>,
}

/// Overrides of the calibrated constants plus the radii used by the locus test.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    pub epsilon0: Option<f64>,
    pub radii: Option<Vec<f64>>,
    pub mean_value: Option<f64>,
    pub heinz_monotonicity: Option<f64>,
    pub heinz_sup: Option<f64>,
    pub epsilon_regularity: Option<f64>,
    pub conical: Option<f64>,
}

impl ExperimentConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| CliError::Parse { path: path.to_path_buf(), msg: e.to_string() })?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text, path)
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("grid.h", self.grid.h),
            ("grid.extent", self.grid.extent),
            ("grid.cell_size", self.grid.cell_size),
            ("target.scale", self.target.scale),
            ("thresholds.epsilon0", self.thresholds.epsilon0),
            ("thresholds.mean_value", self.thresholds.mean_value),
            ("thresholds.heinz_monotonicity", self.thresholds.heinz_monotonicity),
            ("thresholds.heinz_sup", self.thresholds.heinz_sup),
            ("thresholds.epsilon_regularity", self.thresholds.epsilon_regularity),
            ("thresholds.conical", self.thresholds.conical),
        ];
        for (name, v) in positive {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return input(format!("{name} must be positive and finite, got {v}"));
                }
            }
        }
        if let Some(radii) = &self.thresholds.radii {
            if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
                return input("thresholds.radii must be a nonempty list of positive radii");
            }
        }
        if self.target.dim == Some(0) {
            return input("target.dim must be at least 1");
        }
        Ok(())
    }

    /// Built-in constants with the `[thresholds]` overrides applied.
    pub fn constants(&self, base: Constants) -> Constants {
        let t = &self.thresholds;
        Constants {
            epsilon0: t.epsilon0.unwrap_or(base.epsilon0),
            mean_value: t.mean_value.unwrap_or(base.mean_value),
            heinz_monotonicity: t.heinz_monotonicity.unwrap_or(base.heinz_monotonicity),
            heinz_sup: t.heinz_sup.unwrap_or(base.heinz_sup),
            epsilon_regularity: t.epsilon_regularity.unwrap_or(base.epsilon_regularity),
            conical: t.conical.unwrap_or(base.conical),
        }
    }

    pub fn target_name(&self, default: &str) -> String {
        self.target.name.clone().unwrap_or_else(|| default.to_string())
    }

    pub fn target_chart(&self, default: &str) -> Result<Arc<dyn TargetChart>> {
        let name = self.target_name(default);
        match name.as_str() {
            "flat-h" => Ok(Arc::new(flat_quaternion_target(self.target.dim.unwrap_or(1), false))),
            "flat-t4" => Ok(Arc::new(flat_quaternion_target(self.target.dim.unwrap_or(1), true))),
            "eguchi-hanson" => Ok(Arc::new(eguchi_hanson_target(self.target.scale.unwrap_or(1.0))?)),
            other => input(format!("unknown target `{other}` (valid: eguchi-hanson, flat-h, flat-t4)")),
        }
    }

    pub fn param_f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(toml::Value::Float(v)) => Ok(*v),
            Some(toml::Value::Integer(v)) => Ok(*v as f64),
            Some(v) => input(format!("params.{key} must be a number, got {v}")),
        }
    }

    pub fn param_usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.params.get(key) {
            None => Ok(default),
            Some(toml::Value::Integer(v)) if *v >= 0 => Ok(*v as usize),
            Some(v) => input(format!("params.{key} must be a nonnegative integer, got {v}")),
        }
    }

    pub fn param_bool(&self, key: &str, default: bool) -> Result<bool> {
        match self.params.get(key) {
            None => Ok(default),
            Some(toml::Value::Boolean(v)) => Ok(*v),
            Some(v) => input(format!("params.{key} must be a boolean, got {v}")),
        }
    }

    pub fn param_str(&self, key: &str, default: &str) -> Result<String> {
        match self.params.get(key) {
            None => Ok(default.to_string()),
            Some(toml::Value::String(v)) => Ok(v.clone()),
            Some(v) => input(format!("params.{key} must be a string, got {v}")),
        }
    }

    pub fn param_vec(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.params.get(key) {
            None => Ok(default.to_vec()),
            Some(toml::Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    toml::Value::Float(x) => Ok(*x),
                    toml::Value::Integer(x) => Ok(*x as f64),
                    other => input(format!("params.{key} must hold numbers, got {other}")),
                })
                .collect(),
            Some(v) => input(format!("params.{key} must be an array, got {v}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::parse(s, Path::new("test.toml"))
    }

    #[test]
    fn minimal_config() {
        let c = parse("experiment = \"psi-spectrum\"\n").unwrap();
        assert_eq!(c.seed, 0);
        assert!(c.params.is_empty());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(parse("experiment = \"x\"\nbogus = 1\n"), Err(CliError::Parse { .. })));
        assert!(parse("experiment = \"x\"\n[grid]\nspacing = 0.1\n").is_err());
    }

    #[test]
    fn thresholds_must_be_positive() {
        assert!(matches!(parse("experiment = \"x\"\n[thresholds]\nepsilon0 = -1.0\n"), Err(CliError::Input(_))));
        assert!(parse("experiment = \"x\"\n[thresholds]\nradii = []\n").is_err());
    }

    #[test]
    fn params_are_typed() {
        let c = parse("experiment = \"x\"\n[params]\nn = 3\nx = 0.5\nv = [1, 2.5]\n").unwrap();
        assert_eq!(c.param_usize("n", 0).unwrap(), 3);
        assert_eq!(c.param_f64("n", 0.0).unwrap(), 3.0);
        assert_eq!(c.param_vec("v", &[]).unwrap(), vec![1.0, 2.5]);
        assert!(c.param_usize("x", 0).is_err());
        assert_eq!(c.param_f64("missing", 7.0).unwrap(), 7.0);
    }

    #[test]
    fn targets_by_name() {
        let mut c = parse("experiment = \"x\"\n").unwrap();
        assert_eq!(c.target_chart("flat-h").unwrap().name(), "flat-h");
        c.target.name = Some("k3".into());
        assert!(c.target_chart("flat-h").is_err());
    }
}
