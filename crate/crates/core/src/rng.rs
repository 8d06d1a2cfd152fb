//! Seeded randomness for trajectories.
//!
//! Shot `i` of a campaign with master seed `s` draws from ChaCha8 keyed by `s`
//! on stream `i`, so a shot's randomness does not depend on which other shots
//! ran, in what order, or on how many threads.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use rand_chacha::rand_core::RngCore;
pub use rand_chacha::ChaCha8Rng as ShotRng;

/// Generator for shot `index` under `master_seed`.
pub fn shot_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Uniform sample in `[0, 1)` with 53 random bits.
pub fn uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
