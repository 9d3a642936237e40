//! Deterministic seed derivation for independent RNG streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream identifiers. Each network trained by a model gets its own stream
/// so that ensembles are reproducible regardless of training order.
pub mod stream {
    pub const DIRECT: u64 = 0x0100;
    /// Plus the 0-based label index.
    pub const CORRELATION: u64 = 0x0200;
    pub const GROUP: u64 = 0x0300;
    /// Plus the 0-based group index.
    pub const POSITION: u64 = 0x0400;
    /// Shuffling inside the trainer, distinct from weight initialization.
    pub const SHUFFLE: u64 = 0xff00;
}

/// SplitMix64 finalizer.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed = splitmix64(master XOR splitmix64(stream)).
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    splitmix64(master ^ splitmix64(stream))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
