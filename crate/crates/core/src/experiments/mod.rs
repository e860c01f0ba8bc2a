//! Executable experiments. Each returns a serializable report comparing
//! Monte-Carlo estimates with closed-form values.
//!
//! Every trial draws from its own counter-based stream, so reports are
//! bitwise reproducible for a given seed regardless of thread count.

mod contrast;
mod frame;
mod inequality;
mod kink;
mod nonsignal;
mod runner;
mod sweep;

use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::spin::Direction;

pub use contrast::{
    mixture_exact_correlation, run_superposition_contrast, ContrastConfig, ContrastReport,
};
pub use frame::{run_frame_ordering, FrameReport, OrderingStats, HISTORY_DIVERGENCE_THRESHOLD};
pub use inequality::{
    paper_bound, run_inequality, InequalityConfig, InequalityReport, EXCLUSION_P_VALUE,
    REQUIRED_Q_FRACTION,
};
pub use kink::kink_slope;
pub use nonsignal::{run_nonsignaling_check, NonsignalingReport};
pub use sweep::{run_correlation_sweep, SweepReport, SweepRow};

/// Trial floor for experiments that report hypothesis tests.
pub const MIN_TRIALS: u64 = 10_000;

/// Measurement directions for Alice and Bob.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSettings {
    pub alice: Direction,
    pub bob: Direction,
}

impl PairSettings {
    pub fn new(alice: Direction, bob: Direction) -> Self {
        Self { alice, bob }
    }

    /// Planar settings at `+45°` and `−45°` from the vertical axis.
    pub fn orthogonal_45() -> Self {
        Self {
            alice: Direction::planar(FRAC_PI_4),
            bob: Direction::planar(-FRAC_PI_4),
        }
    }
}

impl Default for PairSettings {
    fn default() -> Self {
        Self::orthogonal_45()
    }
}

/// Per-cell Monte-Carlo tolerance `k·√(p(1−p)/N)`.
pub fn cell_tolerance(p: f64, trials: u64, k: f64) -> f64 {
    k * (p * (1.0 - p) / trials as f64).sqrt()
}
