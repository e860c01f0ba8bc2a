//! Singlet versus the 50/50 classical mixture of the `+−` and `−+`
//! definite-spin preparations, at the same settings.

use serde::{Deserialize, Serialize};

use super::runner::{ensure_trials, run_trials};
use super::{PairSettings, MIN_TRIALS};
use crate::error::Result;
use crate::models::{Assignment, ModelSpec, Ordering};
use crate::spin::Direction;
use crate::stats::{bernoulli, z_test, CorrelationEstimate, JointCounts, StreamFamily};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContrastConfig {
    pub trials: u64,
    pub seed: u64,
    pub settings: PairSettings,
    #[serde(default)]
    pub allow_small: bool,
}

impl ContrastConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            settings: PairSettings::orthogonal_45(),
            allow_small: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastReport {
    pub trials: u64,
    pub seed: u64,
    pub settings: PairSettings,
    pub singlet: CorrelationEstimate,
    pub singlet_exact: f64,
    pub mixture: CorrelationEstimate,
    pub mixture_exact: f64,
    /// Two-sided p-value of the mixture estimate against the singlet value.
    pub mixture_vs_singlet_p_value: f64,
}

/// Average of the two definite-spin branches along the vertical axis.
pub fn mixture_exact_correlation(a: &Direction, b: &Direction) -> f64 {
    [Assignment::PlusMinus, Assignment::MinusPlus]
        .iter()
        .map(|&asg| ModelSpec::definite_aligned(Direction::Z, asg).exact_correlation(a, b))
        .sum::<f64>()
        / 2.0
}

pub fn run_superposition_contrast(config: &ContrastConfig) -> Result<ContrastReport> {
    ensure_trials(
        config.trials,
        if config.allow_small { 1 } else { MIN_TRIALS },
    )?;
    let PairSettings { alice: a, bob: b } = config.settings;

    let singlet_family = StreamFamily::new(config.seed, "contrast/singlet");
    let singlet: JointCounts = run_trials(config.trials, |acc: &mut JointCounts, i| {
        let mut rng = singlet_family.stream(i);
        let mut state = ModelSpec::Quantum.prepare(&mut rng);
        let (x, y) =
            ModelSpec::Quantum.measure_pair(&mut state, &a, &b, Ordering::AliceFirst, &mut rng)?;
        acc.record(x, y);
        Ok(())
    })?;

    let mixture_family = StreamFamily::new(config.seed, "contrast/mixture");
    let mixture: JointCounts = run_trials(config.trials, |acc: &mut JointCounts, i| {
        let mut rng = mixture_family.stream(i);
        let assignment = if bernoulli(&mut rng, 0.5) {
            Assignment::PlusMinus
        } else {
            Assignment::MinusPlus
        };
        let spec = ModelSpec::definite_aligned(Direction::Z, assignment);
        let mut state = spec.prepare(&mut rng);
        let (x, y) = spec.measure_pair(&mut state, &a, &b, Ordering::AliceFirst, &mut rng)?;
        acc.record(x, y);
        Ok(())
    })?;

    let singlet_exact = ModelSpec::Quantum.exact_correlation(&a, &b);
    let mixture_exact = mixture_exact_correlation(&a, &b);
    let mixture = mixture.correlation()?.with_exact(mixture_exact);
    Ok(ContrastReport {
        trials: config.trials,
        seed: config.seed,
        settings: config.settings,
        singlet: singlet.correlation()?.with_exact(singlet_exact),
        singlet_exact,
        mixture_vs_singlet_p_value: z_test(&mixture, singlet_exact),
        mixture,
        mixture_exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn exact_values() {
        let s = PairSettings::orthogonal_45();
        assert!((mixture_exact_correlation(&s.alice, &s.bob) + 0.5).abs() < 1e-12);
        assert_eq!(
            mixture_exact_correlation(&Direction::Z, &Direction::Z),
            -1.0
        );
    }

    #[test]
    fn estimates_near_exact() {
        let r = run_superposition_contrast(&ContrastConfig::new(200_000, 8)).unwrap();
        assert!(r.singlet_exact.abs() < 1e-15);
        for e in [r.singlet, r.mixture] {
            assert!((e.estimate - e.exact.unwrap()).abs() < 5.0 * e.stderr.max(1e-12));
        }
        assert!(r.mixture_vs_singlet_p_value < 1e-6);
    }

    #[test]
    fn equal_settings_mixture_is_perfectly_anticorrelated() {
        let cfg = ContrastConfig {
            settings: PairSettings::new(Direction::Z, Direction::Z),
            ..ContrastConfig::new(20_000, 9)
        };
        let r = run_superposition_contrast(&cfg).unwrap();
        assert_eq!(r.mixture.estimate, -1.0);
        assert_eq!(r.mixture_exact, -1.0);
    }

    #[test]
    fn trial_floor() {
        assert!(matches!(
            run_superposition_contrast(&ContrastConfig::new(10, 1)),
            Err(Error::InsufficientTrials { .. })
        ));
    }
}
