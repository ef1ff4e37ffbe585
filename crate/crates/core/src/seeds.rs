//! Seed derivation for reproducible, order-independent random streams.
//!
//! Every trajectory in an ensemble owns a ChaCha8 stream seeded from
//! `derive_seed(master, index)`. The derivation is the SplitMix64 output
//! function applied to `master + (index + 1) * GOLDEN`, which is stable across
//! platforms and releases, so trajectory `i` sees the same stream whether the
//! ensemble runs serially or in parallel.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trajectory `index` under `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Seed for an auxiliary purpose (initial data, independent replicas, ...)
/// of a trajectory, kept apart from the event stream seed.
pub fn derive_aux_seed(trajectory_seed: u64, purpose: u64) -> u64 {
    derive_seed(trajectory_seed ^ 0xA5A5_A5A5_A5A5_A5A5, purpose)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
