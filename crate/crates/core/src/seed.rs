//! Seed derivation. Every random decision in the crate flows from one master
//! seed through these functions, so outputs never depend on thread count or
//! scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer, a bijection on `u64`.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th child stream of `master`:
/// `mix64(master ^ mix64((index + 1) * GOLDEN_GAMMA))`.
///
/// For a fixed master the map is injective in `index`. The formula is part of
/// the output format; changing it changes every generated dataset.
pub fn child_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ mix64(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Child seed keyed by a string, e.g. the text of a rule.
pub fn keyed_seed(master: u64, key: &str) -> u64 {
    let digest = Sha256::digest(key.as_bytes());
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    child_seed(master, u64::from_le_bytes(bytes))
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
