//! Deterministic seed streams.
//!
//! One master seed expands to independent per-replicate and per-cell
//! generators through a counter-based SplitMix64 mix, so replicates can run
//! in parallel (and trees can be rebuilt cell by cell) while staying
//! bit-reproducible. The scheme:
//!
//! * replicate stream:  seed_r = mix(mix(master) ^ GOLDEN * (replicate+1))
//! * cell stream:       seed_c = mix(seed_r ^ mix(label_hash))
//!
//! where `label_hash` folds the Ulam-Harris word with an FNV-style hash.

use rand_chacha::ChaCha12Rng;
use rand_chacha::rand_core::SeedableRng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for replicate `replicate` of a run with the given master seed.
pub fn replicate_seed(master: u64, replicate: u64) -> u64 {
    mix(mix(master) ^ GOLDEN.wrapping_mul(replicate.wrapping_add(1)))
}

/// FNV-1a over the Ulam-Harris word; the empty word (the root) maps to the
/// offset basis.
pub fn label_hash(label: &[u32]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &part in label {
        h ^= u64::from(part).wrapping_add(1);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn cell_seed(replicate_seed: u64, label: &[u32]) -> u64 {
    mix(replicate_seed ^ mix(label_hash(label)))
}

pub fn rng_from(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

pub fn replicate_rng(master: u64, replicate: u64) -> ChaCha12Rng {
    rng_from(replicate_seed(master, replicate))
}
