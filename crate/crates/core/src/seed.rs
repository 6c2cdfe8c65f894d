//! Seed splitting. Every random choice in the crate flows from one 64-bit
//! seed: task `i` of a run seeded with `s` uses `split(s, i)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// The splitmix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sub-seed for task `index`: `mix64(seed + (index + 1) * GOLDEN)`.
pub fn split(seed: u64, index: u64) -> u64 {
    mix64(seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Bernoulli(2^{-e}), exactly: true iff `e` fair bits all come up zero.
pub fn bernoulli_dyadic<R: Rng + ?Sized>(rng: &mut R, mut e: u32) -> bool {
    while e >= 64 {
        if rng.next_u64() != 0 {
            return false;
        }
        e -= 64;
    }
    e == 0 || rng.next_u64() & ((1u64 << e) - 1) == 0
}
