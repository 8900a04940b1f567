//! Seeding scheme for reproducible, order-independent random streams.
//!
//! Every random stream in the crate is a `ChaCha8Rng` keyed by a 64-bit seed.
//! Sub-streams (per sweep point, per trial, per graph attempt) are derived by
//! hashing the master seed together with the stream coordinates, so the
//! result of a trial never depends on which worker ran it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type Rng = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a sub-seed from a master seed and a path of stream indices.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &idx| splitmix64(acc ^ splitmix64(idx.wrapping_add(0x5851_F42D_4C95_7F2D))))
}

/// Generator for the stream at `path` under `master`.
pub fn stream(master: u64, path: &[u64]) -> Rng {
    Rng::seed_from_u64(derive_seed(master, path))
}

/// Generator seeded directly.
pub fn seeded(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}
