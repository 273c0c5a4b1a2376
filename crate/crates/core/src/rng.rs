//! Seed derivation. Every stochastic component draws from a stream keyed by
//! `(master seed, index)`, so results do not depend on execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// One round of the SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for `index` under `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ index.wrapping_mul(GOLDEN_GAMMA))
}

pub fn stream(seed: u64, index: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, index))
}

/// Tags that keep the seed spaces of different pipeline stages apart.
pub mod domain {
    pub const FOLDS: u64 = 0x464f_4c44;
    pub const SELECTION: u64 = 0x4c41_5353;
    pub const MODEL: u64 = 0x4d4f_4445;
    pub const SUBJECT: u64 = 0x5355_424a;
}

/// Seed for `index` inside a named stage.
pub fn stage_seed(seed: u64, stage: u64, index: u64) -> u64 {
    derive_seed(derive_seed(seed, stage), index)
}
