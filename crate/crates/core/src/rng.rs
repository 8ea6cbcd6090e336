//! Seeded random streams.
//!
//! Every stochastic stage of a trial draws from its own ChaCha stream keyed by
//! the trial seed, so adding draws to one stage never shifts another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const STREAM_MASK: u64 = 1;
pub const STREAM_CANDIDATES: u64 = 2;
pub const STREAM_TRAIN: u64 = 3;
pub const STREAM_INIT: u64 = 4;

pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
