//! Sum-rate of the downlink multiuser link sharing the selected beams.
//!
//! Each of the `m` active beams carries `ρ/m` (noise power 1) and is given to
//! the user with the largest SINR on it; users may win several beams. The
//! beam set for a conditional rate `R_m` is the `m` best beams for the
//! sensor, as the selection rule would pick them.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::energy::{run_energy_trials_with, EnergyRunConfig};
use super::run_chunked;
use super::stats::{RateEstimate, TrialStats};
use crate::analytic::HarvestLaw;
use crate::channel::{draw_realization_with, projection_matrix};
use crate::error::{out_of_range, Result};
use crate::params::SystemParams;
use crate::rng::{derive_seed, stream_rng};
use crate::selection::rank_beams;

/// `SINR_{k,j}` for `users × beams` row-major gains `|⟨h_k, w_j⟩|²`, all
/// `beams` active at `ρ/beams` each.
pub fn sinr_matrix(gains: &[f64], users: usize, beams: usize, snr: f64) -> Vec<f64> {
    assert_eq!(gains.len(), users * beams, "gain matrix shape");
    if beams == 0 {
        return Vec::new();
    }
    let p = snr / beams as f64;
    let mut out = Vec::with_capacity(gains.len());
    for row in gains.chunks_exact(beams) {
        let total: f64 = row.iter().sum();
        for &g in row {
            let interference = (total - g).max(0.0);
            out.push(p * g / (1.0 + p * interference));
        }
    }
    out
}

/// Winning user per beam; ties go to the lowest user index.
pub fn assign_beams(sinr: &[f64], users: usize, beams: usize) -> Vec<usize> {
    assert_eq!(sinr.len(), users * beams, "SINR matrix shape");
    (0..beams)
        .map(|j| {
            let mut best = 0;
            for k in 1..users {
                if sinr[k * beams + j] > sinr[best * beams + j] {
                    best = k;
                }
            }
            best
        })
        .collect()
}

/// `Σ_j log₂(1 + SINR_{k_j, j})` for the assignment `k_j`.
pub fn beam_sum_rate(sinr: &[f64], beams: usize, assignment: &[usize]) -> f64 {
    assignment
        .iter()
        .enumerate()
        .map(|(j, &k)| sinr[k * beams + j].ln_1p() / std::f64::consts::LN_2)
        .sum()
}

/// Sum-rate over the columns `cols` of a `users × total` gain matrix.
fn rate_on_columns(gains: &[f64], users: usize, total: usize, cols: &[usize], snr: f64) -> f64 {
    let m = cols.len();
    let mut sub = Vec::with_capacity(users * m);
    for k in 0..users {
        sub.extend(cols.iter().map(|&j| gains[k * total + j]));
    }
    let sinr = sinr_matrix(&sub, users, m, snr);
    beam_sum_rate(&sinr, m, &assign_beams(&sinr, users, m))
}

/// Sum-rate when the beams `active` (row indices of `beams`) serve the users.
pub(crate) fn active_sum_rate(
    users: &DMatrix<Complex64>,
    beams: &DMatrix<Complex64>,
    active: &[usize],
    snr: f64,
) -> f64 {
    let gains = projection_matrix(users, beams);
    rate_on_columns(&gains, users.nrows(), beams.nrows(), active, snr)
}

fn check_rate_inputs(params: &SystemParams, snr: f64, trials: u64) -> Result<()> {
    params.validate()?;
    if !(snr.is_finite() && snr >= 0.0) {
        return Err(out_of_range("snr", snr, ">= 0"));
    }
    if trials == 0 {
        return Err(out_of_range("trials", 0, ">= 1"));
    }
    Ok(())
}

#[derive(Debug, Clone, Default)]
struct RateSums {
    sum: Vec<f64>,
    sq: Vec<f64>,
    weighted: Vec<f64>,
    weighted_sq: Vec<f64>,
}

impl RateSums {
    fn merge(&mut self, o: &RateSums) {
        for (a, b) in self.sum.iter_mut().zip(&o.sum) {
            *a += b;
        }
        for (a, b) in self.sq.iter_mut().zip(&o.sq) {
            *a += b;
        }
        for (a, b) in self.weighted.iter_mut().zip(&o.weighted) {
            *a += b;
        }
        for (a, b) in self.weighted_sq.iter_mut().zip(&o.weighted_sq) {
            *a += b;
        }
    }
}

/// Rates for every `m` in `counts` from the same realizations (common random
/// numbers), plus each per-trial weighted average `Σ_i w_i r_{counts[i]}`.
fn rate_trials(
    params: &SystemParams,
    counts: &[usize],
    weights: &[Vec<f64>],
    snr: f64,
    trials: u64,
    seed: u64,
) -> RateSums {
    let big_m = params.antennas;
    let k = params.users;
    let zero = RateSums {
        sum: vec![0.0; counts.len()],
        sq: vec![0.0; counts.len()],
        weighted: vec![0.0; weights.len()],
        weighted_sq: vec![0.0; weights.len()],
    };
    let parts = run_chunked(trials, |stream, n| {
        let mut rng = stream_rng(seed, stream);
        let mut acc = zero.clone();
        let mut per_m = vec![0.0; counts.len()];
        for _ in 0..n {
            let real = draw_realization_with(params, &mut rng, true);
            let users = real.user_channels.as_ref().expect("user channels requested");
            let gains = projection_matrix(users, &real.beams);
            let order = rank_beams(&real.projections);
            for (slot, &m) in counts.iter().enumerate() {
                let r = rate_on_columns(&gains, k, big_m, &order[..m], snr);
                per_m[slot] = r;
                acc.sum[slot] += r;
                acc.sq[slot] += r * r;
            }
            for (i, w) in weights.iter().enumerate() {
                let avg: f64 = w.iter().zip(&per_m).map(|(w, r)| w * r).sum();
                acc.weighted[i] += avg;
                acc.weighted_sq[i] += avg * avg;
            }
        }
        acc
    });
    let mut total = zero;
    for p in &parts {
        total.merge(p);
    }
    total
}

/// Conditional average sum-rate `R_m` with `m` active beams.
pub fn sumrate_conditional(
    params: &SystemParams,
    active_count: usize,
    snr: f64,
    trials: u64,
    seed: u64,
) -> Result<RateEstimate> {
    check_rate_inputs(params, snr, trials)?;
    if active_count == 0 || active_count > params.antennas {
        return Err(out_of_range(
            "active beam count",
            active_count,
            format!("1..={}", params.antennas),
        ));
    }
    let s = rate_trials(params, &[active_count], &[], snr, trials, seed);
    Ok(RateEstimate::from_sums(s.sum[0], s.sq[0], trials))
}

/// `R_1..R_M` estimated on shared realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalRates {
    pub rates: Vec<RateEstimate>,
}

/// Every `R_m`, `m = 1..=M`, from one set of realizations. Entry `m-1`
/// equals [`sumrate_conditional`] at `m` with the same seed.
pub fn conditional_rates(
    params: &SystemParams,
    snr: f64,
    trials: u64,
    seed: u64,
) -> Result<ConditionalRates> {
    check_rate_inputs(params, snr, trials)?;
    let counts: Vec<usize> = (1..=params.antennas).collect();
    let s = rate_trials(params, &counts, &[], snr, trials, seed);
    Ok(ConditionalRates {
        rates: (0..counts.len())
            .map(|i| RateEstimate::from_sums(s.sum[i], s.sq[i], trials))
            .collect(),
    })
}

/// `Σ_m w_m R_m` for each weight vector `w` (length `M`), all estimated on
/// one set of realizations. With PMF weights at several thresholds this
/// traces a sum-rate curve on common random numbers.
pub fn weighted_sumrates(
    params: &SystemParams,
    weights: &[Vec<f64>],
    snr: f64,
    trials: u64,
    seed: u64,
) -> Result<Vec<RateEstimate>> {
    check_rate_inputs(params, snr, trials)?;
    if let Some(w) = weights.iter().find(|w| w.len() != params.antennas) {
        return Err(out_of_range("weight vector length", w.len(), format!("{}", params.antennas)));
    }
    let counts: Vec<usize> = (1..=params.antennas).collect();
    let s = rate_trials(params, &counts, weights, snr, trials, seed);
    Ok((0..weights.len())
        .map(|i| RateEstimate::from_sums(s.weighted[i], s.weighted_sq[i], trials))
        .collect())
}

/// Energy and sum-rate recorded together on each trial: the beams chosen
/// by the selection rule serve the users.
pub fn run_joint_trials(params: &SystemParams, snr: f64, trials: u64, seed: u64) -> Result<TrialStats> {
    check_rate_inputs(params, snr, trials)?;
    let mut cfg = EnergyRunConfig::new(trials, seed);
    cfg.keep_samples = false;
    cfg.snr = Some(snr);
    run_energy_trials_with(params, &cfg)
}

/// Average sum-rate two ways.
#[derive(Debug, Clone, PartialEq)]
pub struct SumRateAverage {
    /// `Σ_m Pr[M_a = m] R_m` with the closed-form PMF.
    pub analytic: RateEstimate,
    /// Joint simulation of selection and scheduling on independent draws.
    pub empirical: RateEstimate,
    pub conditional: Vec<RateEstimate>,
    pub pmf: Vec<f64>,
}

impl SumRateAverage {
    /// `|analytic - empirical|` in units of the combined standard error.
    pub fn discrepancy(&self) -> f64 {
        let d = (self.analytic.mean - self.empirical.mean).abs();
        let se = self.analytic.se.hypot(self.empirical.se);
        if d == 0.0 {
            0.0
        } else {
            d / se
        }
    }
}

pub fn sumrate_average(params: &SystemParams, snr: f64, trials: u64, seed: u64) -> Result<SumRateAverage> {
    check_rate_inputs(params, snr, trials)?;
    let pmf = HarvestLaw::new(params)?.pmf();
    let counts: Vec<usize> = (1..=params.antennas).collect();
    let s = rate_trials(params, &counts, std::slice::from_ref(&pmf), snr, trials, seed);
    let joint = run_joint_trials(params, snr, trials, derive_seed(seed, 1))?;
    Ok(SumRateAverage {
        analytic: RateEstimate::from_sums(s.weighted[0], s.weighted_sq[0], trials),
        empirical: joint.mean_sumrate(),
        conditional: (0..counts.len())
            .map(|i| RateEstimate::from_sums(s.sum[i], s.sq[i], trials))
            .collect(),
        pmf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_link_unit_gain() {
        let sinr = sinr_matrix(&[1.0], 1, 1, 1.0);
        assert_eq!(sinr, vec![1.0]);
        let a = assign_beams(&sinr, 1, 1);
        assert_eq!(beam_sum_rate(&sinr, 1, &a), 1.0);
    }

    #[test]
    fn interference_and_ties() {
        // two users, two beams, ρ = 2 → per-beam power 1
        let gains = [1.0, 1.0, 3.0, 0.0];
        let sinr = sinr_matrix(&gains, 2, 2, 2.0);
        assert_eq!(sinr, vec![0.5, 0.5, 3.0, 0.0]);
        assert_eq!(assign_beams(&sinr, 2, 2), vec![1, 0]);
        let tied = [1.0, 1.0, 1.0, 1.0];
        assert_eq!(assign_beams(&tied, 2, 2), vec![0, 0]);
    }

    #[test]
    fn rejects_bad_counts() {
        let p = SystemParams::default();
        assert!(sumrate_conditional(&p, 0, 10.0, 10, 1).is_err());
        assert!(sumrate_conditional(&p, 5, 10.0, 10, 1).is_err());
        assert!(sumrate_conditional(&p, 1, -1.0, 10, 1).is_err());
    }

    #[test]
    fn conditional_matches_batch() {
        let p = SystemParams::default();
        let all = conditional_rates(&p, 10.0, 5000, 9).unwrap();
        for m in 1..=4 {
            let one = sumrate_conditional(&p, m, 10.0, 5000, 9).unwrap();
            assert_eq!(one, all.rates[m - 1]);
        }
    }

    #[test]
    fn weighted_matches_average() {
        let p = SystemParams::default();
        let avg = sumrate_average(&p, 10.0, 3000, 5).unwrap();
        let w = weighted_sumrates(&p, &[avg.pmf.clone(), vec![0.0, 0.0, 0.0, 1.0]], 10.0, 3000, 5).unwrap();
        assert_eq!(w[0], avg.analytic);
        assert_eq!(w[1], avg.conditional[3]);
        assert!(weighted_sumrates(&p, &[vec![1.0]], 10.0, 10, 1).is_err());
    }

    #[test]
    fn vanishing_snr() {
        let p = SystemParams::default();
        let r = sumrate_conditional(&p, 4, 1e-12, 2000, 2).unwrap();
        assert!(r.mean >= 0.0 && r.mean < 1e-10);
    }

    #[test]
    fn all_beam_regime_is_exact() {
        let p = SystemParams::default().with_energy_threshold(0.0);
        let avg = sumrate_average(&p, 10.0, 3000, 4).unwrap();
        let r4 = sumrate_conditional(&p, 4, 10.0, 3000, 4).unwrap();
        assert_eq!(avg.analytic.mean, r4.mean);
    }
}
