//! Deterministic seed derivation.
//!
//! Every random stream in an experiment is derived from the master seed and a
//! path of integer labels, so results never depend on which worker ran what.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random source used throughout the engine.
pub type SimRng = ChaCha8Rng;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derive a child seed from `parent` and a sequence of labels.
pub fn derive(parent: u64, labels: &[u64]) -> u64 {
    labels
        .iter()
        .fold(mix64(parent), |acc, &label| mix64(acc ^ mix64(label)))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}
