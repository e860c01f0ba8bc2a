use serde::{Deserialize, Serialize};

use super::runner::{ensure_trials, run_trials, Accumulator};
use crate::error::Result;
use crate::models::{ModelSpec, Ordering};
use crate::spin::{Direction, Outcome};
use crate::stats::StreamFamily;

/// Alice's marginal under two remote settings, replayed from the same streams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonsignalingReport {
    pub model: ModelSpec,
    pub ordering: Ordering,
    pub trials: u64,
    pub seed: u64,
    pub alice_setting: Direction,
    pub bob_settings: [Direction; 2],
    pub alice_plus: [u64; 2],
    pub marginals: [f64; 2],
    /// `|P̂(A=+1 | b1) − P̂(A=+1 | b2)|`
    pub difference: f64,
    /// `5·√(0.25/N)`
    pub tolerance: f64,
    pub statistically_zero: bool,
    /// Trials in which Alice's outcome changed with the remote setting.
    pub alice_mismatches: u64,
    pub bitwise_identical: bool,
}

#[derive(Default)]
struct Tally {
    plus: [u64; 2],
    mismatches: u64,
}

impl Accumulator for Tally {
    fn merge(&mut self, other: Self) {
        self.plus[0] += other.plus[0];
        self.plus[1] += other.plus[1];
        self.mismatches += other.mismatches;
    }
}

pub fn run_nonsignaling_check(
    spec: &ModelSpec,
    a: &Direction,
    b1: &Direction,
    b2: &Direction,
    ordering: Ordering,
    trials: u64,
    seed: u64,
) -> Result<NonsignalingReport> {
    ensure_trials(trials, 1)?;
    let family = StreamFamily::new(seed, "nonsignal");
    let tally: Tally = run_trials(trials, |acc: &mut Tally, i| {
        let mut rng = family.stream(i);
        let prepared = spec.prepare(&mut rng);
        let mut alice = [Outcome::Plus; 2];
        for (k, b) in [b1, b2].into_iter().enumerate() {
            let mut state = prepared.clone();
            let mut stream = rng.clone();
            alice[k] = spec
                .measure_pair(&mut state, a, b, ordering, &mut stream)?
                .0;
            acc.plus[k] += u64::from(alice[k] == Outcome::Plus);
        }
        acc.mismatches += u64::from(alice[0] != alice[1]);
        Ok(())
    })?;

    let marginals = tally.plus.map(|c| c as f64 / trials as f64);
    let difference = (marginals[0] - marginals[1]).abs();
    let tolerance = 5.0 * (0.25 / trials as f64).sqrt();
    Ok(NonsignalingReport {
        model: *spec,
        ordering,
        trials,
        seed,
        alice_setting: *a,
        bob_settings: [*b1, *b2],
        alice_plus: tally.plus,
        marginals,
        difference,
        tolerance,
        statistically_zero: difference < tolerance,
        alice_mismatches: tally.mismatches,
        bitwise_identical: tally.mismatches == 0,
    })
}
