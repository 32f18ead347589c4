//! Seed derivation for reproducible parallel sampling.
//!
//! Every random draw in the crate goes through a [`ChaCha8Rng`] whose seed is
//! derived from a master seed and a tuple of integer coordinates (point index,
//! centroid index, iteration, ...). The derived seed depends only on those
//! coordinates, so results do not depend on the order in which a thread pool
//! schedules work.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hashes `master` together with `parts` into a new 64-bit seed.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    let mut state = mix64(master.wrapping_add(GOLDEN_GAMMA));
    for (slot, &part) in parts.iter().enumerate() {
        state = mix64(state ^ part.wrapping_add(GOLDEN_GAMMA.wrapping_mul(slot as u64 + 2)));
    }
    state
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Domain tags keep seeds for unrelated draws apart.
pub(crate) mod domain {
    pub const KMEANS_INIT: u64 = 0x6b6d_696e;
    pub const KMEANS_ASSIGN: u64 = 0x6b6d_6173;
    pub const KMEANS_RESTART: u64 = 0x6b6d_7273;
    pub const KERNEL_GRAM: u64 = 0x6b67_7261;
    pub const KERNEL_CROSS: u64 = 0x6b63_726f;
    pub const SMO: u64 = 0x736d_6f00;
    pub const SPLIT: u64 = 0x7370_6c74;
    pub const TRIAL: u64 = 0x7472_6961;
}
