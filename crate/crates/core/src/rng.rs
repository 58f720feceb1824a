//! Deterministic per-trial random streams.
//!
//! A root seed keys one ChaCha20 generator; trial `t` draws scheme
//! randomness from stream `2t` and adversary randomness from stream
//! `2t + 1`, so the two never overlap and trials are independent of the
//! order they run in.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub type StreamRng = ChaCha20Rng;

pub fn scheme_rng(seed: u64, trial: u64) -> StreamRng {
    let mut r = ChaCha20Rng::seed_from_u64(seed);
    r.set_stream(2 * trial);
    r
}

pub fn adversary_rng(seed: u64, trial: u64) -> StreamRng {
    let mut r = ChaCha20Rng::seed_from_u64(seed);
    r.set_stream(2 * trial + 1);
    r
}

/// Seed for a strategy's private generator in trial `trial`.
pub fn adversary_seed(seed: u64, trial: u64) -> u64 {
    adversary_rng(seed, trial).next_u64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_distinct_and_reproducible() {
        let a: Vec<u64> = (0..4).map(|_| 0).scan(scheme_rng(7, 3), |r, _| Some(r.next_u64())).collect();
        let b: Vec<u64> = (0..4).map(|_| 0).scan(scheme_rng(7, 3), |r, _| Some(r.next_u64())).collect();
        assert_eq!(a, b);
        assert_ne!(scheme_rng(7, 3).next_u64(), adversary_rng(7, 3).next_u64());
        assert_ne!(scheme_rng(7, 3).next_u64(), scheme_rng(7, 4).next_u64());
        assert_ne!(scheme_rng(7, 3).next_u64(), scheme_rng(8, 3).next_u64());
    }
}
