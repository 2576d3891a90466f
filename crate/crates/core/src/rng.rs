//! Seeded random streams.
//!
//! Every stochastic routine takes an explicit `u64` seed. Independent pieces
//! of one computation (the trial index of a Monte Carlo loop, the sign
//! diagonal versus the Gaussian diagonal of an operator, ...) draw from
//! separate ChaCha8 streams of the same key, so results are bit-identical
//! regardless of thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream tags used by the library. Callers may use any other `u64` freely.
pub(crate) mod tag {
    pub const BASIS: u64 = 1;
    pub const POINTS: u64 = 2;
    pub const MATRIX: u64 = 3;
    pub const SIGNS: u64 = 4;
    pub const GAUSS_DIAG: u64 = 5;
    pub const ROWS: u64 = 6;
    pub const SKETCH: u64 = 7;
    pub const MASK: u64 = 8;
    /// Monte Carlo trial `t` uses stream `TRIALS + t`.
    pub const TRIALS: u64 = 1 << 32;
}

/// The generator for `stream` under key `seed`.
pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Generator for the `trial`-th Monte Carlo draw.
pub fn trial(seed: u64, trial: u64) -> Rng {
    stream(seed, tag::TRIALS.wrapping_add(trial))
}

/// Mixes a base seed with a list of labels into a fresh 64-bit seed
/// (splitmix64 finalizer applied per label).
pub fn derive(seed: u64, labels: &[u64]) -> u64 {
    labels.iter().fold(splitmix(seed), |acc, &l| splitmix(acc ^ splitmix(l)))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
