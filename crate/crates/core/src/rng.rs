//! Derived random streams.
//!
//! Every consumer of randomness (a game round, a redraw, a baseline chain)
//! gets its own ChaCha stream whose seed is a fixed mix of the master seed
//! and a path of indices. Streams never depend on scheduling order, so
//! parallel runs reproduce serial ones bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Domain tags keep streams for different purposes apart even when the
/// numeric path coincides.
pub mod domain {
    pub const GAME_RUN: u64 = 0x6761_6d65;
    pub const ROUND: u64 = 0x726f_756e;
    pub const BASELINE: u64 = 0x6261_7365;
    pub const GRID: u64 = 0x6772_6964;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds `path` into `master`, producing a well-mixed child seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn stream(master: u64, path: &[u64]) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(master, path))
}
