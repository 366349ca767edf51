//! Monte Carlo oracle for the harvested energy and the active-beam count,
//! and the sum-rate estimator.
//!
//! Trials run in fixed chunks of [`crate::rng::CHUNK_TRIALS`], each on its
//! own stream, possibly in parallel on the current rayon pool. Chunk results
//! are merged in chunk order, so accumulators are bitwise reproducible for a
//! given `(seed, params, trials)` regardless of the number of workers.

mod energy;
mod stats;
mod sumrate;

pub use energy::{run_energy_trials, run_energy_trials_with, EnergyRunConfig};
pub use stats::{sup_distance_to_cdf, total_variation, Histogram, RateEstimate, TrialStats};
pub use sumrate::{
    assign_beams, beam_sum_rate, conditional_rates, run_joint_trials, sinr_matrix,
    sumrate_average, sumrate_conditional, weighted_sumrates, ConditionalRates, SumRateAverage,
};

use rayon::prelude::*;

use crate::rng::chunks;

/// Runs `work(stream, count)` over all chunks and returns results in chunk
/// order.
pub(crate) fn run_chunked<T, F>(trials: u64, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, u64) -> T + Sync,
{
    let parts: Vec<(u64, u64)> = chunks(trials).collect();
    parts.into_par_iter().map(|(stream, count)| work(stream, count)).collect()
}
