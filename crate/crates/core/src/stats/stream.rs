//! Counter-based random streams.
//!
//! Every trial of every experiment draws from its own stream, addressed by
//! `(master_seed, label, trial_index)`. Because the address alone determines
//! the stream, results do not depend on how trials are split across threads.
//!
//! Algorithm (kept stable so that recorded seeds keep reproducing):
//!
//! ```text
//! h      = FNV-1a-64(label bytes)
//! base   = mix64(master_seed) ^ h
//! key[i] = mix64(base + (i + 1) * 0x9E37_79B9_7F4A_7C15)   for i in 0..4  (little-endian)
//! stream = ChaCha8(key), stream id = trial_index, word position 0
//! ```
//!
//! where `mix64` is the SplitMix64 finalizer. Uniform reals use the top 53
//! bits of one `u64` draw: `u = (x >> 11) · 2⁻⁵³ ∈ [0, 1)`.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// SplitMix64 output finalizer.
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(FNV_PRIME)
    })
}

/// Address of one trial's random stream.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamSpec {
    pub master_seed: u64,
    pub label: String,
    pub trial_index: u64,
}

impl StreamSpec {
    pub fn new(master_seed: u64, label: impl Into<String>, trial_index: u64) -> Self {
        Self {
            master_seed,
            label: label.into(),
            trial_index,
        }
    }
}

/// All streams sharing a master seed and label; hands out one stream per
/// trial index. Computing the key once makes per-trial derivation cheap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamFamily {
    key: [u8; 32],
}

impl StreamFamily {
    pub fn new(master_seed: u64, label: &str) -> Self {
        let base = mix64(master_seed) ^ fnv1a(label.as_bytes());
        let mut key = [0u8; 32];
        for (i, chunk) in key.chunks_exact_mut(8).enumerate() {
            let word = mix64(base.wrapping_add((i as u64 + 1).wrapping_mul(GOLDEN_GAMMA)));
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        Self { key }
    }

    pub fn stream(&self, trial_index: u64) -> TrialStream {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(trial_index);
        TrialStream(rng)
    }
}

/// Derives the stream addressed by `spec`. Pure: equal specs give equal streams.
pub fn derive_stream(spec: &StreamSpec) -> TrialStream {
    StreamFamily::new(spec.master_seed, &spec.label).stream(spec.trial_index)
}

/// A per-trial deterministic random stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialStream(ChaCha8Rng);

impl TrialStream {
    /// Uniform real in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        uniform01(self)
    }
}

impl RngCore for TrialStream {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

/// Uniform real in `[0, 1)` from the top 53 bits of one draw.
pub fn uniform01<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Bernoulli draw consuming exactly one `u64`. Probabilities within `1e-12`
/// of 0 or 1 are treated as certain so that collapse and perfect-correlation
/// cases are exact rather than failing once in 2⁵³ draws.
pub fn bernoulli<R: RngCore + ?Sized>(rng: &mut R, p: f64) -> bool {
    const CERTAIN: f64 = 1e-12;
    let u = uniform01(rng);
    if p >= 1.0 - CERTAIN {
        true
    } else if p <= CERTAIN {
        false
    } else {
        u < p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn draws(mut s: TrialStream, n: usize) -> Vec<u64> {
        (0..n).map(|_| s.next_u64()).collect()
    }

    #[test]
    fn same_spec_same_stream() {
        let spec = StreamSpec::new(42, "exp", 7);
        assert_eq!(
            draws(derive_stream(&spec), 1000),
            draws(derive_stream(&spec), 1000)
        );
    }

    #[test]
    fn neighbouring_indices_differ() {
        let a = draws(derive_stream(&StreamSpec::new(42, "exp", 0)), 1000);
        let b = draws(derive_stream(&StreamSpec::new(42, "exp", 1)), 1000);
        assert!(a.iter().zip(&b).all(|(x, y)| x != y));
    }

    #[test]
    fn labels_and_seeds_separate_families() {
        let base = draws(derive_stream(&StreamSpec::new(42, "exp", 0)), 4);
        assert_ne!(
            base,
            draws(derive_stream(&StreamSpec::new(42, "exq", 0)), 4)
        );
        assert_ne!(
            base,
            draws(derive_stream(&StreamSpec::new(43, "exp", 0)), 4)
        );
    }

    #[test]
    fn family_matches_derive_stream() {
        let fam = StreamFamily::new(9, "lbl");
        for i in [0u64, 1, 1 << 40] {
            assert_eq!(
                draws(fam.stream(i), 8),
                draws(derive_stream(&StreamSpec::new(9, "lbl", i)), 8)
            );
        }
    }

    #[test]
    fn no_prefix_collisions_over_a_million_indices() {
        let fam = StreamFamily::new(2012, "collision-check");
        let mut seen = HashSet::with_capacity(1_000_000);
        for i in 0..1_000_000u64 {
            let mut s = fam.stream(i);
            let prefix = (u128::from(s.next_u64()) << 64) | u128::from(s.next_u64());
            assert!(seen.insert(prefix), "collision at trial index {i}");
        }
    }

    #[test]
    fn uniform_mean_matches_moment_oracle() {
        // Var(U[0,1)) = 1/12
        let n = 1_000_000u64;
        let mut s = derive_stream(&StreamSpec::new(5, "uniform-moment", 0));
        let mean = (0..n).map(|_| s.uniform()).sum::<f64>() / n as f64;
        let tol = 5.0 * (1.0 / 12.0 / n as f64).sqrt();
        assert!((mean - 0.5).abs() < tol, "mean {mean}");
    }

    #[test]
    fn uniform_range() {
        let mut s = derive_stream(&StreamSpec::new(1, "range", 3));
        for _ in 0..10_000 {
            let u = s.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn bernoulli_edges_are_certain() {
        let mut s = derive_stream(&StreamSpec::new(1, "bern", 0));
        for _ in 0..10_000 {
            assert!(bernoulli(&mut s, 1.0));
            assert!(bernoulli(&mut s, 1.0 - 1e-15));
            assert!(!bernoulli(&mut s, 0.0));
            assert!(!bernoulli(&mut s, 1e-15));
        }
    }
}
