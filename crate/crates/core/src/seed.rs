//! Deterministic seed derivation.
//!
//! Every random decision in a pipeline run draws from a generator seeded by
//! [`derive`], keyed on the master seed plus a path of integers (chunk id,
//! boosting round, retry, ...). The result depends only on that path, so
//! output is independent of worker count and scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub const TAG_MAP: u64 = 0x6d61_7000;
pub const TAG_BOOST: u64 = 0x626f_6f73;
pub const TAG_RESAMPLE: u64 = 0x7273_6d70;
pub const TAG_REPEAT: u64 = 0x7265_7074;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix `master` with an ordered key path into a new 64-bit seed.
pub fn derive(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &p| {
        splitmix64(acc ^ splitmix64(p))
    })
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
