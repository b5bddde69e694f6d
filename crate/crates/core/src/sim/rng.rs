//! Random streams.
//!
//! Everything is drawn from ChaCha8 keyed by a 64-bit seed. Stream 0 of a
//! run seed drives backoff draws and AP addressing, stream 1 draws station
//! ratios when `run` is called directly. Run seeds come from stream
//! `1 + run` of the master seed, and the stratified ratio sequence of station
//! slot `s` from stream `u64::MAX - s`, so neither depends on the node count
//! or the variant being simulated.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

pub fn backoff_rng(seed: u64) -> ChaCha8Rng {
    stream(seed, 0)
}

pub fn traffic_rng(seed: u64) -> ChaCha8Rng {
    stream(seed, 1)
}

/// Seed of replication `run` under `master`.
pub fn run_seed(master: u64, run: usize) -> u64 {
    stream(master, 1 + run as u64).next_u64()
}

/// Stream of station slot `slot` in a stratified ratio assignment.
pub(super) fn assignment_rng(master: u64, slot: usize) -> ChaCha8Rng {
    stream(master, u64::MAX - slot as u64)
}
