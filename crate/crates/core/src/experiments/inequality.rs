//! Local definite-spin model measured on two orthogonal directions at ±45°
//! from the preparation axis, against the singlet at the same settings.
//!
//! Zero correlation needs `P + N − 4Q = 0`, i.e. the `Q` pattern in a quarter
//! of all trials, whereas the consecutive-measurement law lets each station
//! depart from its predetermined value only `sin²(π/8) ≈ 0.1464` of the time.
//! The report carries both the raw joint counts and the symmetric `Q`
//! bookkeeping, where `Q` is the mean of the `(+,−)` and `(−,+)` counts.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::runner::{ensure_trials, run_trials, Accumulator};
use super::{PairSettings, MIN_TRIALS};
use crate::error::Result;
use crate::models::{Assignment, ModelSpec, Ordering};
use crate::spin::{Direction, Outcome};
use crate::stats::{z_score, z_test, CorrelationEstimate, JointCounts, StreamFamily};

/// Fraction of `Q`-type trials that zero correlation would require.
pub const REQUIRED_Q_FRACTION: f64 = 0.25;

/// p-value below which the local model counts as statistically excluded.
pub const EXCLUSION_P_VALUE: f64 = 1e-6;

/// `sin²(π/8)`: the per-station flip rate allowed by the consecutive law at 45°.
pub fn paper_bound() -> f64 {
    (PI / 8.0).sin().powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityConfig {
    pub trials: u64,
    pub seed: u64,
    pub assignment: Assignment,
    pub settings: PairSettings,
    /// Skip the trial floor (for smoke runs only).
    #[serde(default)]
    pub allow_small: bool,
}

impl InequalityConfig {
    pub fn new(trials: u64, seed: u64, assignment: Assignment) -> Self {
        Self {
            trials,
            seed,
            assignment,
            settings: PairSettings::orthogonal_45(),
            allow_small: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub trials: u64,
    pub seed: u64,
    pub assignment: Assignment,
    pub settings: PairSettings,
    pub counts: JointCounts,
    /// `P`: trials with Alice `+1`.
    pub count_alice_plus: u64,
    /// `N`: trials with Alice `−1`.
    pub count_alice_minus: u64,
    /// `Q`: trials with Alice `+1`, Bob `−1`.
    pub count_q: u64,
    /// Trials with Alice `−1`, Bob `+1` (equated with `Q` in the symmetric reading).
    pub count_q_mirror: u64,
    /// `Σ A·B` over the local-model sample.
    pub product_sum: i64,
    /// `P + N − 4Q` with `Q = (count_q + count_q_mirror)/2`, kept integral as `P + N − 2(q + q')`.
    pub identity_symmetric: i64,
    /// `P + N − 4·count_q`; equals `product_sum` only if the two mixed counts coincide.
    pub identity_raw: i64,
    pub identity_holds: bool,
    pub correlation_estimate: CorrelationEstimate,
    pub local_model_exact: f64,
    pub quantum_estimate: CorrelationEstimate,
    pub quantum_expected: f64,
    pub quantum_p_value: f64,
    /// z-score of the local-model estimate against `quantum_expected`.
    pub z_score: f64,
    pub p_value: f64,
    /// Symmetric `Q` as a fraction of trials.
    pub q_fraction: f64,
    pub required_q_fraction: f64,
    /// Fraction of trials where Alice's outcome differs from `sign(a·s_A)`.
    pub alice_flip_fraction: f64,
    pub bob_flip_fraction: f64,
    pub paper_bound: f64,
    pub local_model_excluded: bool,
    pub statement: String,
}

#[derive(Default)]
struct Tally {
    counts: JointCounts,
    alice_flips: u64,
    bob_flips: u64,
}

impl Accumulator for Tally {
    fn merge(&mut self, other: Self) {
        self.counts.merge(&other.counts);
        self.alice_flips += other.alice_flips;
        self.bob_flips += other.bob_flips;
    }
}

fn predetermined(spin: &Direction, setting: &Direction) -> Outcome {
    Outcome::from_bool(setting.dot(spin) >= 0.0)
}

pub fn run_inequality(config: &InequalityConfig) -> Result<InequalityReport> {
    ensure_trials(
        config.trials,
        if config.allow_small { 1 } else { MIN_TRIALS },
    )?;
    let PairSettings { alice: a, bob: b } = config.settings;
    let local = ModelSpec::definite_aligned(Direction::Z, config.assignment);

    let family = StreamFamily::new(config.seed, "inequality/local");
    let tally: Tally = run_trials(config.trials, |acc: &mut Tally, i| {
        let mut rng = family.stream(i);
        let mut state = local.prepare(&mut rng);
        let spins = *state.spins().expect("definite model has hidden spins");
        let (x, y) = local.measure_pair(&mut state, &a, &b, Ordering::AliceFirst, &mut rng)?;
        acc.counts.record(x, y);
        acc.alice_flips += u64::from(x != predetermined(&spins.alice_spin, &a));
        acc.bob_flips += u64::from(y != predetermined(&spins.bob_spin, &b));
        Ok(())
    })?;

    let quantum_family = StreamFamily::new(config.seed, "inequality/quantum");
    let quantum_counts: JointCounts = run_trials(config.trials, |acc: &mut JointCounts, i| {
        let mut rng = quantum_family.stream(i);
        let mut state = ModelSpec::Quantum.prepare(&mut rng);
        let (x, y) =
            ModelSpec::Quantum.measure_pair(&mut state, &a, &b, Ordering::AliceFirst, &mut rng)?;
        acc.record(x, y);
        Ok(())
    })?;

    let counts = tally.counts;
    let n = config.trials;
    let p = counts.alice_plus() as i64;
    let minus = (counts.mp + counts.mm) as i64;
    let product_sum = counts.product_sum();
    let identity_symmetric = p + minus - 2 * (counts.pm + counts.mp) as i64;
    let identity_raw = p + minus - 4 * counts.pm as i64;

    let local_model_exact = local.exact_correlation(&a, &b);
    let quantum_expected = ModelSpec::Quantum.exact_correlation(&a, &b);
    let correlation_estimate = counts.correlation()?.with_exact(local_model_exact);
    let quantum_estimate = quantum_counts.correlation()?.with_exact(quantum_expected);
    let z = z_score(&correlation_estimate, quantum_expected);
    let p_value = z_test(&correlation_estimate, quantum_expected);
    let local_model_excluded = p_value < EXCLUSION_P_VALUE;

    let q_fraction = (counts.pm + counts.mp) as f64 / 2.0 / n as f64;
    let alice_flip_fraction = tally.alice_flips as f64 / n as f64;
    let bob_flip_fraction = tally.bob_flips as f64 / n as f64;
    let bound = paper_bound();

    let statement = format!(
        "zero correlation requires Q in {:.6} of trials (P + N - 4Q = 0); the consecutive-measurement law \
         caps each station's flip rate at sin^2(pi/8) = {:.6} (measured: Alice {:.6}, Bob {:.6}). \
         Local model correlation {:.6} +/- {:.6} (exact {:.6}) vs quantum {:.6}: z = {:.3}, p = {:.3e}; \
         local model {}.",
        REQUIRED_Q_FRACTION,
        bound,
        alice_flip_fraction,
        bob_flip_fraction,
        correlation_estimate.estimate,
        correlation_estimate.stderr,
        local_model_exact,
        quantum_expected,
        z,
        p_value,
        if local_model_excluded { "EXCLUDED" } else { "not excluded" },
    );

    Ok(InequalityReport {
        trials: n,
        seed: config.seed,
        assignment: config.assignment,
        settings: config.settings,
        counts,
        count_alice_plus: counts.alice_plus(),
        count_alice_minus: counts.mp + counts.mm,
        count_q: counts.pm,
        count_q_mirror: counts.mp,
        product_sum,
        identity_symmetric,
        identity_raw,
        identity_holds: product_sum == identity_symmetric,
        correlation_estimate,
        local_model_exact,
        quantum_estimate,
        quantum_expected,
        quantum_p_value: z_test(&quantum_estimate, quantum_expected),
        z_score: z,
        p_value,
        q_fraction,
        required_q_fraction: REQUIRED_Q_FRACTION,
        alice_flip_fraction,
        bob_flip_fraction,
        paper_bound: bound,
        local_model_excluded,
        statement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn bound_value() {
        assert!((paper_bound() - 0.146_446_609_406_726_2).abs() < 1e-15);
        assert!(REQUIRED_Q_FRACTION > paper_bound());
    }

    #[test]
    fn rejects_small_runs() {
        let cfg = InequalityConfig::new(100, 1, Assignment::PlusMinus);
        assert!(matches!(
            run_inequality(&cfg),
            Err(Error::InsufficientTrials { .. })
        ));
        let small = InequalityConfig {
            allow_small: true,
            ..cfg
        };
        assert_eq!(run_inequality(&small).unwrap().trials, 100);
    }

    #[test]
    fn report_invariants_both_assignments() {
        for assignment in [Assignment::PlusMinus, Assignment::MinusPlus] {
            let r = run_inequality(&InequalityConfig::new(100_000, 3, assignment)).unwrap();
            assert_eq!(r.count_alice_plus + r.count_alice_minus, r.trials);
            assert!(r.count_q <= r.count_alice_plus);
            assert!(r.count_q_mirror <= r.count_alice_minus);
            assert!(r.identity_holds);
            assert_eq!(r.product_sum, r.counts.product_sum());
            assert!((r.local_model_exact + 0.5).abs() < 1e-12);
            assert!(r.quantum_expected.abs() < 1e-15);
            let tol = 4.0 / (r.trials as f64).sqrt();
            assert!((r.correlation_estimate.estimate - r.local_model_exact).abs() < tol);
            assert!(r.quantum_estimate.estimate.abs() < tol);
            let flip_tol = 5.0 * (paper_bound() * (1.0 - paper_bound()) / r.trials as f64).sqrt();
            assert!((r.alice_flip_fraction - paper_bound()).abs() < flip_tol);
            assert!((r.bob_flip_fraction - paper_bound()).abs() < flip_tol);
            assert!(r.local_model_excluded);
            assert!(r.statement.contains("0.250000") && r.statement.contains("0.146447"));
        }
    }

    #[test]
    fn deterministic() {
        let cfg = InequalityConfig::new(20_000, 11, Assignment::PlusMinus);
        assert_eq!(run_inequality(&cfg).unwrap(), run_inequality(&cfg).unwrap());
    }
}
