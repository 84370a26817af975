//! Seeded randomness.
//!
//! Every random stage draws from a [`ChaCha8Rng`], a counter-based generator
//! whose output stream is fixed by its 64-bit seed on every platform. Stages
//! get independent streams through [`sub_seed`], which mixes a parent seed
//! with a stage label, so one user-facing seed fans out into reproducible
//! per-stage seeds (generation, initialization, annealing, ...).

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

/// Generator for `seed`.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives the seed of a named stage from a parent seed.
pub fn sub_seed(seed: u64, stage: &str) -> u64 {
    // FNV-1a over the label, then two SplitMix64 rounds.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in stage.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(splitmix64(seed ^ h))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform index in `0..n` drawn through `u64` so the stream does not depend
/// on the platform's pointer width. `n` must be positive.
pub(crate) fn index(rng: &mut ChaCha8Rng, n: usize) -> usize {
    use rand::Rng;
    rng.random_range(0..n as u64) as usize
}
