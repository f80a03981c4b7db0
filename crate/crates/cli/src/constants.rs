use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{input, io_err, CliError, Result};

pub const CONSTANTS_SCHEMA_VERSION: u32 = 1;

/// The constants file shipped with the repository and written by `calibrate`.
pub const DEFAULT_CONSTANTS: &str = include_str!("../../../configs/constants.toml");

/// Constants used as defaults by every experiment.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Constants {
    /// Locus threshold on the renormalized energy, shared with the Heinz and ε-regularity checks.
    pub epsilon0: f64,
    /// `C` in `f(x) ≤ C(r^{−n}∫_{B_r} f + r²‖Δf‖_∞)`.
    pub mean_value: f64,
    /// Constant of the monotonicity hypothesis of the Heinz lemma.
    pub heinz_monotonicity: f64,
    /// Constant in the Heinz sup bound.
    pub heinz_sup: f64,
    /// Constant in `sup_{B_{r/4}} |∇u|² ≤ C(ε/r² + 1)`.
    pub epsilon_regularity: f64,
    /// Constant in front of the conical-deviation majorant.
    pub conical: f64,
}

/// Measured inputs behind each constant.
#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationRecord {
    pub safety_factor: f64,
    pub circle_grid_h: f64,
    pub circle_radii: Vec<f64>,
    pub circle_levels: Vec<usize>,
    pub circle_min_renormalized: f64,
    pub mean_value_max_ratio: f64,
    pub heinz_max_monotonicity_ratio: f64,
    pub heinz_max_fitted: f64,
    pub epsilon_regularity_max_fitted: f64,
    pub conical_max_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsFile {
    pub schema_version: u32,
    pub constants: Constants,
    pub calibration: CalibrationRecord,
}

impl ConstantsFile {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let f: Self = toml::from_str(text).map_err(|e| CliError::Parse { path: origin.to_path_buf(), msg: e.to_string() })?;
        if f.schema_version != CONSTANTS_SCHEMA_VERSION {
            return input(format!("{}: constants schema {} is not supported", origin.display(), f.schema_version));
        }
        let c = &f.constants;
        for v in [c.epsilon0, c.mean_value, c.heinz_monotonicity, c.heinz_sup, c.epsilon_regularity, c.conical] {
            if !(v > 0.0 && v.is_finite()) {
                return input(format!("{}: constants must be positive, got {v}", origin.display()));
            }
        }
        Ok(f)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text, path)
    }

    pub fn builtin() -> Self {
        Self::parse(DEFAULT_CONSTANTS, Path::new("configs/constants.toml")).expect("shipped constants file is valid")
    }

    pub fn to_text(&self) -> String {
        let body = toml::to_string_pretty(self).expect("constants serialize");
        format!("# Frozen defaults written by `fueter-lab calibrate`; edit by re-running it.\n{body}")
    }
}

/// Rounds `x > 0` up to two significant digits.
pub fn round_up_2(x: f64) -> f64 {
    round_2(x, f64::ceil)
}

/// Rounds `x > 0` down to two significant digits.
pub fn round_down_2(x: f64) -> f64 {
    round_2(x, f64::floor)
}

fn round_2(x: f64, f: fn(f64) -> f64) -> f64 {
    if !(x > 0.0 && x.is_finite()) {
        return x;
    }
    let e = x.log10().floor() as i32 - 1;
    let scale = 10f64.powi(e);
    // snap to the decimal grid before rounding so that 0.25 stays 0.25
    let m = (x / scale * 1e9).round() / 1e9;
    let r = f(m);
    if e >= 0 {
        r * scale
    } else {
        r / 10f64.powi(-e)
    }
}
