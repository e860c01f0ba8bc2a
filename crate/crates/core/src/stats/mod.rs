//! Deterministic randomness, estimators and hypothesis tests.

mod estimate;
mod stream;

pub use estimate::{
    correlation_from_counts, p_value_from_z, wilson_interval, z_score, z_test, CorrelationEstimate,
    JointCounts,
};
pub use stream::{bernoulli, derive_stream, uniform01, StreamFamily, StreamSpec, TrialStream};
