//! Seeded random streams.
//!
//! Every stochastic operation draws from ChaCha8 seeded with
//! `ChaCha8Rng::seed_from_u64(seed)`; Gaussian draws use the ziggurat
//! `StandardNormal` sampler. Identical seeds give identical streams on every
//! platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
