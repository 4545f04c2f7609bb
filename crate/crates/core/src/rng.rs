//! Seeded random-number substreams. Every stochastic unit of work (one
//! bootstrap draw, one replication) gets its own ChaCha stream derived from
//! the master seed and its index, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream `index` of the generator keyed by `seed`.
pub fn substream(seed: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Packs a two-level index (e.g. configuration, replication) into one stream id.
pub fn stream_id(outer: u32, inner: u32) -> u64 {
    ((outer as u64) << 32) | inner as u64
}

/// Derives an independent seed for a nested procedure (e.g. the fold split
/// inside one simulation replication).
pub fn child_seed(rng: &mut SimRng) -> u64 {
    rand::RngCore::next_u64(rng)
}
