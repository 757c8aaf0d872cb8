//! Seeded random streams. Every consumer of randomness derives its own stream
//! from `(seed, stream id)` so results never depend on call order elsewhere.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream ids reserved by the library.
pub mod streams {
    pub const GRID_FEATURES: u64 = 1;
    pub const GRID_PROJECTION: u64 = 2;
    pub const GRID_NOISE: u64 = 3;
    pub const KNAPSACK: u64 = 10;
    pub const STOCHASTIC_SP: u64 = 20;
    pub const MARKET: u64 = 30;
    pub const TARGET_INIT: u64 = 100;
    pub const SURROGATE_INIT: u64 = 101;
    pub const MINIBATCH: u64 = 102;
    pub const PERTURB: u64 = 103;
    pub const RANDOM_BASELINE: u64 = 104;
}

pub fn stream(seed: u64, id: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Mixes an index into a seed (splitmix64 finalizer).
pub fn derive(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
