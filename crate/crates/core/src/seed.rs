//! Deterministic derivation of child rng streams from a master seed.
//!
//! Every tree and every benchmark repetition owns a ChaCha stream seeded by
//! `derive_seed(parent, index)`, so results do not depend on how work is
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Salt separating per-tree streams from per-repetition streams.
pub const TREE_STREAM: u64 = 0x7472_6565;
pub const RUN_STREAM: u64 = 0x7275_6e73;
pub const NOISE_STREAM: u64 = 0x6e6f_6973;
pub const SUBSAMPLE_STREAM: u64 = 0x7375_6273;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `(parent, salt, index)` into a new 64-bit seed with two splitmix64 rounds.
pub fn derive_seed(parent: u64, salt: u64, index: u64) -> u64 {
    splitmix64(splitmix64(parent ^ salt.rotate_left(32)).wrapping_add(index))
}

pub fn stream(parent: u64, salt: u64, index: u64) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(parent, salt, index))
}
