//! Seed derivation. Every random stream in the crate is a ChaCha8 stream
//! keyed by a master seed and a stream id, so results never depend on
//! thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn stream(seed: u64, stream_id: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Seed for the `index`-th point of a sweep.
pub fn point_seed(seed: u64, index: usize) -> u64 {
    seed ^ index as u64
}
