//! Deterministic random streams.
//!
//! Every stochastic routine takes a [`SimRng`]. Independent replications and sweep
//! points draw from `stream(master_seed, index)`: a ChaCha8 generator keyed by the
//! master seed, with the 64-bit ChaCha stream id set to `index`. Streams of one key
//! never overlap, so the result of a job depends only on `(master_seed, index)` and
//! not on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream(master_seed: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Stream index of replication `rep` at sweep point `point`.
pub fn job_index(point: usize, rep: usize) -> u64 {
    ((point as u64) << 32) | rep as u64
}
