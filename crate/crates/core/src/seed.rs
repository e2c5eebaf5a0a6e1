//! Deterministic seed derivation.
//!
//! Every stage of the pipeline gets its own RNG stream derived from one
//! global seed and a stage label, so adding or reordering stages never
//! perturbs the others.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a over a byte string.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    fnv1a_extend(FNV_OFFSET, bytes)
}

fn fnv1a_extend(mut h: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for a named stage.
pub fn derive(seed: u64, stage: &str) -> u64 {
    let h = fnv1a_extend(fnv1a(&seed.to_le_bytes()), stage.as_bytes());
    mix(h)
}

/// Seed for the `index`-th item of a stage (a tree, a trace, ...).
pub fn derive_indexed(seed: u64, stage: &str, index: u64) -> u64 {
    mix(derive(seed, stage) ^ mix(index.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
