//! Seed derivation. Every random draw in the crate comes from a
//! [`ChaCha8Rng`] built here, so a single root seed determines a run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream identifiers, kept distinct so that consumers never share draws.
pub mod stream {
    pub const PROTAGONIST: u64 = 1;
    pub const ADVERSARY: u64 = 2;
    pub const PROTAGONIST_INIT: u64 = 3;
    pub const ADVERSARY_INIT: u64 = 4;
    pub const ENV_RESET: u64 = 5;
    pub const EVAL_POLICY: u64 = 6;
    pub const EVAL_ATTACK: u64 = 7;
    pub const EVAL_RESET: u64 = 8;
    pub const GRADCHECK: u64 = 9;
    pub const HER: u64 = 10;
    pub const OPPONENT: u64 = 11;
}

/// splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a root seed and a path of tags.
pub fn derive_seed(root: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(mix(root), |acc, &t| mix(acc ^ mix(t)))
}

/// A generator on its own ChaCha stream.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
