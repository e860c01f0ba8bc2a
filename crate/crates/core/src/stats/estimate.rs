use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::spin::{JointDistribution, Outcome};

/// Monte-Carlo estimate of a ±1 product mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub estimate: f64,
    /// `√((1 − estimate²) / trials)`
    pub stderr: f64,
    pub trials: u64,
    /// Closed-form value the estimate should converge to, when one is known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<f64>,
}

impl CorrelationEstimate {
    pub fn new(estimate: f64, trials: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::ZeroTotal);
        }
        let estimate = estimate.clamp(-1.0, 1.0);
        Ok(Self {
            estimate,
            stderr: ((1.0 - estimate * estimate) / trials as f64).sqrt(),
            trials,
            exact: None,
        })
    }

    pub fn with_exact(mut self, exact: f64) -> Self {
        self.exact = Some(exact);
        self
    }

    /// Binomial-scale tolerance `k/√N` used for correlation comparisons.
    pub fn binomial_tolerance(&self, k: f64) -> f64 {
        k / (self.trials as f64).sqrt()
    }
}

/// Sum-of-products correlation from the four joint outcome counts.
pub fn correlation_from_counts(
    n_pp: u64,
    n_pm: u64,
    n_mp: u64,
    n_mm: u64,
) -> Result<CorrelationEstimate> {
    let total = n_pp + n_pm + n_mp + n_mm;
    if total == 0 {
        return Err(Error::ZeroTotal);
    }
    let signed = (n_pp + n_mm) as i128 - (n_pm + n_mp) as i128;
    CorrelationEstimate::new(signed as f64 / total as f64, total)
}

/// Two-sided normal p-value for `estimate` against `expected`. With zero
/// standard error the comparison is exact: 1 if equal, 0 otherwise.
pub fn z_test(estimate: &CorrelationEstimate, expected: f64) -> f64 {
    let diff = estimate.estimate - expected;
    if estimate.stderr == 0.0 {
        return if diff == 0.0 { 1.0 } else { 0.0 };
    }
    p_value_from_z(diff / estimate.stderr)
}

pub fn z_score(estimate: &CorrelationEstimate, expected: f64) -> f64 {
    let diff = estimate.estimate - expected;
    if estimate.stderr == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        }
    } else {
        diff / estimate.stderr
    }
}

pub fn p_value_from_z(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0)
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, confidence: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::ZeroTotal);
    }
    if successes > trials {
        return Err(Error::InvalidArgument(format!(
            "successes {successes} exceed trials {trials}"
        )));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "confidence {confidence} outside (0, 1)"
        )));
    }
    let z = Normal::standard().inverse_cdf(0.5 + confidence / 2.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2n = z * z / n;
    let center = (p + z2n / 2.0) / (1.0 + z2n);
    let half = z / (1.0 + z2n) * (p * (1.0 - p) / n + z2n / (4.0 * n)).sqrt();
    let lo = if successes == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    Ok((lo, hi))
}

/// Tallies of the four joint outcomes of a pair measurement.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointCounts {
    pub pp: u64,
    pub pm: u64,
    pub mp: u64,
    pub mm: u64,
}

impl JointCounts {
    pub fn record(&mut self, alice: Outcome, bob: Outcome) {
        match (alice, bob) {
            (Outcome::Plus, Outcome::Plus) => self.pp += 1,
            (Outcome::Plus, Outcome::Minus) => self.pm += 1,
            (Outcome::Minus, Outcome::Plus) => self.mp += 1,
            (Outcome::Minus, Outcome::Minus) => self.mm += 1,
        }
    }

    pub fn merge(&mut self, other: &Self) {
        self.pp += other.pp;
        self.pm += other.pm;
        self.mp += other.mp;
        self.mm += other.mm;
    }

    pub fn total(&self) -> u64 {
        self.pp + self.pm + self.mp + self.mm
    }

    pub fn alice_plus(&self) -> u64 {
        self.pp + self.pm
    }

    pub fn bob_plus(&self) -> u64 {
        self.pp + self.mp
    }

    /// Sum over trials of the outcome product.
    pub fn product_sum(&self) -> i64 {
        (self.pp + self.mm) as i64 - (self.pm + self.mp) as i64
    }

    pub fn correlation(&self) -> Result<CorrelationEstimate> {
        correlation_from_counts(self.pp, self.pm, self.mp, self.mm)
    }

    pub fn frequencies(&self) -> Result<JointDistribution> {
        let n = self.total();
        if n == 0 {
            return Err(Error::ZeroTotal);
        }
        let n = n as f64;
        JointDistribution::new(
            self.pp as f64 / n,
            self.pm as f64 / n,
            self.mp as f64 / n,
            self.mm as f64 / n,
        )
    }
}
