//! Cooperative beam selection for one coherence interval.
//!
//! The base station ranks the beams by the sensor's projection power and
//! keeps the largest number `m` of best beams for which the sensor still
//! collects `E_th` under the equal power split `P_T/m`. In dimensionless form
//! the rule is: the largest `m` with `z_m >= m·μ`, where `z_m` is the sum of
//! the `m` largest projections. Since `z_m/m` never increases with `m`, the
//! feasible counts form a prefix `1..=m*`. When even the best beam at full
//! power misses the threshold the station still transmits on that beam.

use crate::error::{out_of_range, Error, Result};
use crate::params::SystemParams;

/// Result of applying the selection rule to one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOutcome {
    /// Number of active beams `M_a`.
    pub active_count: usize,
    /// Zero-based indices of the active beams, strongest projection first.
    pub active_beams: Vec<usize>,
    /// Harvested energy in joules.
    pub harvested_energy: f64,
    /// False only on the best-beam fallback.
    pub threshold_met: bool,
}

/// Energy harvested from one beam carrying `P_T/m` with projection `alpha`.
pub fn harvested_energy_per_beam(
    params: &SystemParams,
    active_count: usize,
    projection: f64,
) -> Result<f64> {
    let c = params.energy_constant()?;
    if active_count == 0 || active_count > params.antennas {
        return Err(out_of_range(
            "active beam count",
            active_count,
            format!("1..={}", params.antennas),
        ));
    }
    if !(projection >= 0.0 && projection.is_finite()) {
        return Err(out_of_range("projection power", projection, ">= 0"));
    }
    Ok(c * projection / active_count as f64)
}

/// Beam indices sorted by descending projection; ties go to the lower index.
pub fn rank_beams(projections: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..projections.len()).collect();
    order.sort_by(|&a, &b| projections[b].total_cmp(&projections[a]).then(a.cmp(&b)));
    order
}

/// Largest feasible beam count for descending-sorted projections, or `None`
/// when the best beam alone cannot meet `mu`.
pub fn feasible_beam_count(sorted_desc: &[f64], mu: f64) -> Option<usize> {
    let mut sum = 0.0;
    let mut best = None;
    for (idx, &a) in sorted_desc.iter().enumerate() {
        sum += a;
        let m = idx + 1;
        if sum >= m as f64 * mu {
            best = Some(m);
        } else {
            break;
        }
    }
    best
}

/// Applies the selection rule with dimensionless threshold `mu` and energy
/// constant `c`. Shared by [`select_beams`] and the Monte Carlo loop.
pub(crate) fn select_with(projections: &[f64], mu: f64, c: f64) -> SelectionOutcome {
    let order = rank_beams(projections);
    let sorted: Vec<f64> = order.iter().map(|&i| projections[i]).collect();
    let (count, met) = match feasible_beam_count(&sorted, mu) {
        Some(m) => (m, true),
        None => (1, false),
    };
    let partial: f64 = sorted[..count].iter().sum();
    SelectionOutcome {
        active_count: count,
        active_beams: order[..count].to_vec(),
        harvested_energy: c * partial / count as f64,
        threshold_met: met,
    }
}

/// Selects the active beams for one vector of per-beam projection powers.
pub fn select_beams(params: &SystemParams, projections: &[f64]) -> Result<SelectionOutcome> {
    let c = params.energy_constant()?;
    let mu = params.mu()?;
    if projections.len() != params.antennas {
        return Err(Error::ProjectionCount {
            expected: params.antennas,
            got: projections.len(),
        });
    }
    if let Some(bad) = projections.iter().find(|a| !(**a >= 0.0 && a.is_finite())) {
        return Err(out_of_range("projection power", bad, ">= 0"));
    }
    Ok(select_with(projections, mu, c))
}
