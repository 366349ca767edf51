use super::run_chunked;
use super::stats::{Histogram, TrialStats};
use super::sumrate::active_sum_rate;
use crate::channel::draw_realization_with;
use crate::error::{out_of_range, Result};
use crate::params::SystemParams;
use crate::rng::stream_rng;
use crate::selection::select_with;

/// Options for [`run_energy_trials_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyRunConfig {
    pub trials: u64,
    pub seed: u64,
    pub bins: usize,
    /// Upper histogram edge in joules; defaults to `2 E_th`, or `3c` when
    /// the threshold is zero.
    pub histogram_max: Option<f64>,
    pub keep_samples: bool,
    /// Downlink SNR; when set, user channels are drawn as well and the
    /// sum-rate over the selected beams is recorded.
    pub snr: Option<f64>,
}

impl EnergyRunConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        EnergyRunConfig {
            trials,
            seed,
            bins: 200,
            histogram_max: None,
            keep_samples: true,
            snr: None,
        }
    }
}

/// Draw, select and harvest for `trials` coherence intervals.
pub fn run_energy_trials(params: &SystemParams, trials: u64, seed: u64) -> Result<TrialStats> {
    run_energy_trials_with(params, &EnergyRunConfig::new(trials, seed))
}

pub fn run_energy_trials_with(params: &SystemParams, cfg: &EnergyRunConfig) -> Result<TrialStats> {
    let snr = cfg.snr;
    if let Some(rho) = snr {
        if !(rho.is_finite() && rho >= 0.0) {
            return Err(out_of_range("snr", rho, ">= 0"));
        }
    }
    let c = params.energy_constant()?;
    let mu = params.mu()?;
    if cfg.trials == 0 {
        return Err(out_of_range("trials", 0, ">= 1"));
    }
    if cfg.bins == 0 {
        return Err(out_of_range("histogram bins", 0, ">= 1"));
    }
    let eth = mu * c;
    let hist_max = cfg
        .histogram_max
        .unwrap_or(if eth > 0.0 { 2.0 * eth } else { 3.0 * c });
    if !(hist_max > 0.0 && hist_max.is_finite()) {
        return Err(out_of_range("histogram upper edge", hist_max, "> 0"));
    }
    let big_m = params.antennas;
    let template = TrialStats::new(big_m, cfg.seed, Histogram::new(0.0, hist_max, cfg.bins));

    let parts = run_chunked(cfg.trials, |stream, count| {
        let mut rng = stream_rng(cfg.seed, stream);
        let mut acc = template.clone();
        if cfg.keep_samples {
            acc.samples.reserve(count as usize);
        }
        for _ in 0..count {
            let real = draw_realization_with(params, &mut rng, snr.is_some());
            let out = select_with(&real.projections, mu, c);
            if let (Some(rho), Some(users)) = (snr, &real.user_channels) {
                let r = active_sum_rate(users, &real.beams, &out.active_beams, rho);
                acc.sumrate_sum += r;
                acc.sumrate_sq_sum += r * r;
                acc.per_beamcount_rate_sums[out.active_count - 1] += r;
            }
            let e = out.harvested_energy;
            let m = out.active_count;
            acc.trials += 1;
            acc.pmf_counts[m - 1] += 1;
            acc.energy_sum += e;
            acc.energy_sq_sum += e * e;
            acc.histogram.add(e);
            if cfg.keep_samples {
                acc.samples.push(e);
            }
            if m > 1 && m < big_m {
                let ratio = e / eth;
                let upper = 1.0 + 1.0 / m as f64;
                if !(ratio >= 1.0 - 1e-12 && ratio < upper * (1.0 + 1e-12)) {
                    acc.support_violations += 1;
                }
            }
        }
        acc
    });

    let mut total = template;
    for part in &parts {
        total.merge(part);
    }
    Ok(total)
}
