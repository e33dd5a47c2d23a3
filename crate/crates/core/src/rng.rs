//! Seeded random streams.
//!
//! Every stochastic operation takes either a `u64` seed or an explicit RNG.
//! Sub-streams are ChaCha8 stream ids under a fixed key, so results never
//! depend on the order in which arms, trials or cells are evaluated.

use rand::RngCore;
use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

/// Independent stream number `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Child seed for the `index`-th unit of work below `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    stream(seed, index).next_u64()
}
