//! Deterministic random streams.
//!
//! Every replicate, split or simulated song draws from its own ChaCha stream
//! selected by index from the master seed, so results do not depend on how
//! work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG for the `index`-th independent unit of work under `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
