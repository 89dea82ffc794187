//! Reproducible random streams.
//!
//! Every replica owns one ChaCha8 stream keyed by the master seed and selected
//! by the replica index through the cipher's stream id, so streams never
//! overlap and identical `(seed, replica)` pairs replay identical draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

pub fn replica_stream(master_seed: u64, replica: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replica);
    rng
}
