use rayon::prelude::*;

use crate::error::{Error, Result};

/// Trials per work item. Fixed so that floating-point partial sums are
/// always formed over the same trial ranges, whatever the thread count.
pub(crate) const CHUNK: u64 = 4096;

pub(crate) trait Accumulator: Default + Send {
    fn merge(&mut self, other: Self);
}

/// Runs `trial(acc, index)` for every index in `0..trials`, in parallel over
/// fixed chunks, and merges chunk results in index order.
pub(crate) fn run_trials<A, F>(trials: u64, trial: F) -> Result<A>
where
    A: Accumulator,
    F: Fn(&mut A, u64) -> Result<()> + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    let parts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = A::default();
            for i in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                trial(&mut acc, i)?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<A>>>()?;
    let mut total = A::default();
    for part in parts {
        total.merge(part);
    }
    Ok(total)
}

pub(crate) fn ensure_trials(trials: u64, min: u64) -> Result<()> {
    if trials < min.max(1) {
        return Err(Error::InsufficientTrials {
            got: trials,
            min: min.max(1),
        });
    }
    Ok(())
}

impl Accumulator for crate::stats::JointCounts {
    fn merge(&mut self, other: Self) {
        crate::stats::JointCounts::merge(self, &other);
    }
}
