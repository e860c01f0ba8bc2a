//! Exact and Monte-Carlo simulation of sequential and paired spin-½
//! measurements.
//!
//! - [`spin`]: directions, the consecutive-measurement law `cos²(α/2)` and
//!   the singlet joint distribution.
//! - [`models`]: quantum, local hidden-spin, non-local aligning and
//!   deterministic sign models behind one interface, each with a closed-form
//!   correlation.
//! - [`experiments`]: reproducible experiments built from the two above.
//! - [`stats`]: counter-based random streams, estimators and tests.

pub mod error;
pub mod experiments;
pub mod models;
pub mod spin;
pub mod stats;

pub use error::{Error, Result};
pub use models::{Assignment, HiddenState, ModelKind, ModelSpec, Ordering, Station};
pub use spin::{Direction, JointDistribution, Outcome, SpinAssignment};
pub use stats::{CorrelationEstimate, JointCounts, StreamSpec};
