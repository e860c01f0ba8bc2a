//! Same pairs, two time orders. Each trial is prepared once and then
//! measured once with Alice first and once with Bob first, from identical
//! copies of the hidden state and random stream. Observables must agree;
//! the hidden history of Alice's spin does not.

use serde::{Deserialize, Serialize};

use super::cell_tolerance;
use super::runner::{ensure_trials, run_trials, Accumulator};
use crate::error::{Error, Result};
use crate::models::{HistoryEvent, ModelKind, ModelSpec, Ordering, Station};
use crate::spin::{angle_between, singlet_joint_distribution, Direction, JointDistribution};
use crate::stats::{CorrelationEstimate, JointCounts, StreamFamily};

/// Mean divergence (radians) above which hidden histories count as different.
pub const HISTORY_DIVERGENCE_THRESHOLD: f64 = 0.1;

/// Per-cell tolerance multiplier for comparing the two orderings.
const CELL_SIGMAS: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingStats {
    pub ordering: Ordering,
    pub counts: JointCounts,
    pub distribution: JointDistribution,
    pub correlation: CorrelationEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    pub trials: u64,
    pub seed: u64,
    pub alice_setting: Direction,
    pub bob_setting: Direction,
    pub alice_first: OrderingStats,
    pub bob_first: OrderingStats,
    pub max_cell_deviation: f64,
    /// `5·√(p(1−p)/N)` per cell, with `p` from the singlet distribution.
    pub cell_tolerances: [f64; 4],
    pub observables_agree: bool,
    /// Mean angle between Alice's pre-measurement hidden spin under the two orderings.
    pub history_divergence: f64,
    pub histories_diverge: bool,
}

#[derive(Default)]
struct Tally {
    alice_first: JointCounts,
    bob_first: JointCounts,
    divergence_sum: f64,
}

impl Accumulator for Tally {
    fn merge(&mut self, other: Self) {
        self.alice_first.merge(&other.alice_first);
        self.bob_first.merge(&other.bob_first);
        self.divergence_sum += other.divergence_sum;
    }
}

pub fn run_frame_ordering(
    spec: &ModelSpec,
    a: &Direction,
    b: &Direction,
    trials: u64,
    seed: u64,
) -> Result<FrameReport> {
    if spec.kind() != ModelKind::NonlocalAligning {
        return Err(Error::WrongModel {
            operation: "frame ordering",
            expected: ModelKind::NonlocalAligning.name(),
            got: spec.kind().name(),
        });
    }
    ensure_trials(trials, 1)?;
    let family = StreamFamily::new(seed, "frame");
    let tally: Tally = run_trials(trials, |acc: &mut Tally, i| {
        let mut rng = family.stream(i);
        let prepared = spec.prepare(&mut rng);
        let mut alice_pre = [Direction::Z; 2];
        for (k, ordering) in [Ordering::AliceFirst, Ordering::BobFirst]
            .into_iter()
            .enumerate()
        {
            let mut state = prepared.clone();
            let mut stream = rng.clone();
            let (x, y) = spec.measure_pair(&mut state, a, b, ordering, &mut stream)?;
            match ordering {
                Ordering::AliceFirst => acc.alice_first.record(x, y),
                Ordering::BobFirst => acc.bob_first.record(x, y),
            }
            alice_pre[k] = state
                .history()
                .find(HistoryEvent::PreMeasurement(Station::Alice))
                .expect("Alice's measurement is recorded");
        }
        acc.divergence_sum += angle_between(&alice_pre[0], &alice_pre[1]);
        Ok(())
    })?;

    let exact = spec.exact_correlation(a, b);
    let stats = |ordering, counts: JointCounts| -> Result<OrderingStats> {
        Ok(OrderingStats {
            ordering,
            counts,
            distribution: counts.frequencies()?,
            correlation: counts.correlation()?.with_exact(exact),
        })
    };
    let alice_first = stats(Ordering::AliceFirst, tally.alice_first)?;
    let bob_first = stats(Ordering::BobFirst, tally.bob_first)?;

    let reference = singlet_joint_distribution(a, b);
    let cell_tolerances = reference
        .cells()
        .map(|p| cell_tolerance(p, trials, CELL_SIGMAS));
    let deviations: Vec<f64> = alice_first
        .distribution
        .cells()
        .iter()
        .zip(bob_first.distribution.cells())
        .map(|(x, y)| (x - y).abs())
        .collect();
    let observables_agree = deviations
        .iter()
        .zip(cell_tolerances)
        .all(|(d, tol)| *d == 0.0 || *d < tol);
    let history_divergence = tally.divergence_sum / trials as f64;

    Ok(FrameReport {
        trials,
        seed,
        alice_setting: *a,
        bob_setting: *b,
        max_cell_deviation: deviations.iter().copied().fold(0.0, f64::max),
        alice_first,
        bob_first,
        cell_tolerances,
        observables_agree,
        history_divergence,
        histories_diverge: history_divergence > HISTORY_DIVERGENCE_THRESHOLD,
    })
}
