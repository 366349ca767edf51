//! Seeded random streams.
//!
//! Every Monte Carlo run is split into fixed-size chunks of trials and chunk
//! `k` draws from ChaCha8 stream `k` of the master seed. Results therefore
//! depend only on `(seed, params, trials)`, never on how many workers process
//! the chunks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used throughout the crate.
pub type StreamRng = ChaCha8Rng;

/// Trials per chunk; each chunk owns one independent stream.
pub const CHUNK_TRIALS: u64 = 4096;

/// Independent generator for `(master_seed, stream)`.
pub fn stream_rng(master_seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// Master seed for an independent sub-run tagged `tag` (SplitMix64 mix).
pub fn derive_seed(master_seed: u64, tag: u64) -> u64 {
    let mut z = master_seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Splits `trials` into `(stream index, trial count)` chunks.
pub(crate) fn chunks(trials: u64) -> impl Iterator<Item = (u64, u64)> + Clone {
    let n = trials.div_ceil(CHUNK_TRIALS);
    (0..n).map(move |k| (k, CHUNK_TRIALS.min(trials - k * CHUNK_TRIALS)))
}
