//! Resolved run configuration and parsing of angle arguments.

use std::fmt;

use clap::ValueEnum;
use eprsim_core::{Direction, ModelSpec};
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Table,
    Csv,
    Json,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Table => "table",
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// Everything that determines a run's output. Thread count is deliberately
/// absent: it never changes results.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub experiment: &'static str,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub models: Vec<ModelSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Named settings in degrees from the vertical axis.
    #[serde(skip_serializing_if = "serde_json::Map::is_empty")]
    pub settings_deg: serde_json::Map<String, serde_json::Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub angles_deg: Vec<f64>,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
    pub format: Format,
    pub out: Option<String>,
    pub allow_small: bool,
}

pub const MIN_TRIALS: u64 = eprsim_core::experiments::MIN_TRIALS;

pub fn check_trials(trials: u64, allow_small: bool) -> Result<(), CliError> {
    if trials == 0 || (trials < MIN_TRIALS && !allow_small) {
        return Err(CliError::Usage(format!(
            "--trials must be at least {MIN_TRIALS} (got {trials}); pass --allow-small for smaller runs"
        )));
    }
    Ok(())
}

pub fn named_settings(pairs: &[(&str, f64)]) -> serde_json::Map<String, serde_json::Value> {
    pairs
        .iter()
        .map(|(name, deg)| ((*name).to_string(), serde_json::json!(deg)))
        .collect()
}

/// Parses an angle in degrees, accepting `[0, 360)`.
pub fn parse_degrees(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("'{s}' is not a number of degrees"))?;
    if !v.is_finite() || !(0.0..360.0).contains(&v) {
        return Err(format!("angle {v} must lie in [0, 360) degrees"));
    }
    Ok(v)
}

/// Planar direction at `deg` degrees from vertical.
pub fn planar_deg(deg: f64) -> Direction {
    Direction::planar(deg.to_radians())
}

/// Parses `start:stop:step` (inclusive of `stop`) or a comma-separated list.
pub fn parse_angle_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let usage = |msg: String| CliError::Usage(format!("--angles: {msg}"));
    let parts: Vec<&str> = s.split(':').collect();
    let grid = match parts.as_slice() {
        [start, stop, step] => {
            let start = parse_degrees(start).map_err(usage)?;
            let stop = parse_degrees(stop).map_err(usage)?;
            let step: f64 = step
                .trim()
                .parse()
                .map_err(|_| usage(format!("bad step '{step}'")))?;
            if !(step.is_finite() && step > 0.0) || stop < start {
                return Err(usage(format!("need start <= stop and step > 0, got {s}")));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            (0..count).map(|k| start + k as f64 * step).collect()
        }
        [_] => s
            .split(',')
            .map(|p| parse_degrees(p).map_err(usage))
            .collect::<Result<Vec<f64>, _>>()?,
        _ => {
            return Err(usage(format!(
                "expected start:stop:step or a list, got '{s}'"
            )))
        }
    };
    Ok(grid)
}
