//! Seed derivation and the generator used everywhere randomness appears.
//!
//! Every random quantity in the crate is driven by a [`SimRng`] built from a
//! 64-bit seed. Sub-seeds are derived from a master seed and an index path
//! with [`derive_seed`], a counter-based split: the seed of cell
//! `(a, b, c)` depends only on the master seed and the path, never on the
//! order in which cells are evaluated. Extending a grid therefore never
//! perturbs the cells that already existed.
//!
//! The split function, applied once per path element `p`:
//!
//! ```text
//! s <- splitmix64(s ^ splitmix64(p + 0x9E3779B97F4A7C15))
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator type used throughout the crate.
pub type SimRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a sub-seed from `master` and an index path.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(master, |s, &p| {
        splitmix64(s ^ splitmix64(p.wrapping_add(GOLDEN)))
    })
}

/// Shorthand for the single-index split used by per-trial loops.
#[inline]
pub fn split(master: u64, index: u64) -> u64 {
    derive_seed(master, &[index])
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Generator for `path` under `master`.
pub fn rng_for(master: u64, path: &[u64]) -> SimRng {
    rng_from_seed(derive_seed(master, path))
}
