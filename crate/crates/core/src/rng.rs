//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream addressed by a
//! base seed plus a path of integers (replication, stage, restart, ...). Two
//! tasks with different paths never share a stream, so parallel schedules
//! reproduce serial results bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stage tags used when deriving streams, so that independent consumers of
/// the same seed never collide.
pub mod stage {
    pub const LATENTS: u64 = 1;
    pub const ADJACENCY: u64 = 2;
    pub const RESTART: u64 = 3;
    pub const TRUTH: u64 = 4;
    pub const CELL: u64 = 5;
    pub const CODE: u64 = 6;
    pub const BLOCK: u64 = 7;
    pub const SPOT_CHECK: u64 = 8;
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Stream for `seed` addressed by `path`.
pub fn stream(seed: u64, path: &[u64]) -> StreamRng {
    let mut id = 0x6A09_E667_F3BC_C909u64;
    for &p in path {
        id = splitmix(id ^ splitmix(p));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}
