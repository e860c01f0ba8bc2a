use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::runner::{ensure_trials, run_trials};
use crate::error::{Error, Result};
use crate::models::{ModelSpec, Ordering};
use crate::spin::{singlet_correlation_exact, Direction};
use crate::stats::{CorrelationEstimate, JointCounts, StreamFamily};

const GRID_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// Angle between the settings, radians.
    pub angle: f64,
    pub estimate: CorrelationEstimate,
    pub exact: f64,
    pub quantum_exact: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub model: ModelSpec,
    pub trials_per_point: u64,
    pub seed: u64,
    pub rows: Vec<SweepRow>,
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("grid is empty".into()));
    }
    if let Some(bad) = grid
        .iter()
        .find(|a| !a.is_finite() || **a < -GRID_SLACK || **a > PI + GRID_SLACK)
    {
        return Err(Error::InvalidGrid(format!("angle {bad} outside [0, π]")));
    }
    if let Some(w) = grid.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid(format!(
            "angles must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Correlation versus angle for `spec`. Alice measures on the vertical axis,
/// Bob at `angle` from it in the x–z plane.
pub fn run_correlation_sweep(
    spec: &ModelSpec,
    grid: &[f64],
    trials: u64,
    seed: u64,
) -> Result<SweepReport> {
    validate_grid(grid)?;
    ensure_trials(trials, 1)?;
    let a = Direction::Z;
    let rows = grid
        .iter()
        .enumerate()
        .map(|(idx, &angle)| {
            let angle = angle.clamp(0.0, PI);
            let b = Direction::planar(angle);
            let family = StreamFamily::new(seed, &format!("sweep/{}/{idx}", spec.kind().name()));
            let counts: JointCounts = run_trials(trials, |acc: &mut JointCounts, i| {
                let mut rng = family.stream(i);
                let mut state = spec.prepare(&mut rng);
                let (x, y) =
                    spec.measure_pair(&mut state, &a, &b, Ordering::AliceFirst, &mut rng)?;
                acc.record(x, y);
                Ok(())
            })?;
            let exact = spec.exact_correlation(&a, &b);
            Ok(SweepRow {
                angle,
                estimate: counts.correlation()?.with_exact(exact),
                exact,
                quantum_exact: singlet_correlation_exact(&a, &b),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport {
        model: *spec,
        trials_per_point: trials,
        seed,
        rows,
    })
}
