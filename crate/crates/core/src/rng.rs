//! Counter-based substreams for reproducibly parallel simulation.
//!
//! Every trajectory owns a ChaCha stream addressed by `(seed, lane)`, so the
//! draw sequence is a pure function of those two numbers: results are
//! bit-identical no matter how trajectories are scheduled across workers.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// A deterministic generator for the given root seed and lane index.
pub fn substream(seed: u64, lane: u64) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha12Rng::from_seed(key);
    rng.set_stream(lane);
    rng
}
