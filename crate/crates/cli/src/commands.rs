use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use beamharvest_core::montecarlo::{
    run_energy_trials_with, sup_distance_to_cdf, total_variation,
    weighted_sumrates, EnergyRunConfig,
};
use beamharvest_core::rng::derive_seed;
use beamharvest_core::{AnalyticCurve, HarvestLaw, SystemParams};

use crate::args::{RunConfig, SweepSpec, SweptParameter};
use crate::output::{fmt, open, Table};

/// Parses `N` or `trials=N`.
pub fn parse_overlay(s: &str) -> std::result::Result<u64, String> {
    let n = s.strip_prefix("trials=").unwrap_or(s);
    match n.parse::<u64>() {
        Ok(0) | Err(_) => Err(format!("expected a positive trial count, got `{s}`")),
        Ok(v) => Ok(v),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Curve {
    Pdf,
    Cdf,
}

/// Empirical CDF value at `x` and its standard error.
fn ecdf(sorted: &[f64], x: f64) -> (f64, f64) {
    let n = sorted.len() as f64;
    let p = sorted.partition_point(|&s| s <= x) as f64 / n;
    (p, (p * (1.0 - p) / n).sqrt())
}

/// Stride for the sup-distance scan, with its added resolution bound.
fn scan_stride(n: usize) -> usize {
    n.div_ceil(200_000).max(1)
}

pub fn curve(
    cfg: &RunConfig,
    which: Curve,
    points: usize,
    x_max: Option<f64>,
    overlay: Option<u64>,
    out: Option<&Path>,
) -> Result<()> {
    if points < 2 {
        bail!("--points must be >= 2, got {points}");
    }
    let law = HarvestLaw::new(&cfg.params)?;
    let eth = law.energy_threshold();
    let x_max = x_max.unwrap_or(if eth > 0.0 { 3.0 * eth } else { 4.0 * law.energy_constant() });
    if !(x_max.is_finite() && x_max > 0.0) {
        bail!("--x-max must be finite and > 0, got {x_max}");
    }
    let step = x_max / (points - 1) as f64;
    let grid: Vec<f64> = (0..points)
        .map(|i| if i == points - 1 { x_max } else { i as f64 * step })
        .collect();
    let analytic = match which {
        Curve::Pdf => AnalyticCurve::harvested_pdf(&law, &grid)?,
        Curve::Cdf => AnalyticCurve::harvested_cdf(&law, &grid)?,
    };

    let mut header = vec!["x", "value", "region"];
    let sample = match overlay {
        Some(trials) => {
            header.extend(["mc_value", "mc_se"]);
            let mut run = EnergyRunConfig::new(trials, cfg.seed);
            run.bins = 1;
            Some(run_energy_trials_with(&cfg.params, &run)?.sorted_samples())
        }
        None => None,
    };
    let mut table = Table::new(header);
    for ((&x, &v), r) in grid.iter().zip(&analytic.values).zip(&analytic.regions) {
        let mut row = vec![fmt(x), fmt(v), r.map(|r| r.label()).unwrap_or_default()];
        if let Some(s) = &sample {
            let (value, se) = match which {
                Curve::Cdf => ecdf(s, x),
                Curve::Pdf => {
                    let (lo, hi) = ((x - 0.5 * step).max(0.0), x + 0.5 * step);
                    let n = s.len() as f64;
                    let p = (s.partition_point(|&v| v < hi) - s.partition_point(|&v| v < lo)) as f64 / n;
                    let w = hi - lo;
                    (p / w, (p * (1.0 - p) / n).sqrt() / w)
                }
            };
            row.extend([fmt(value), fmt(se)]);
        }
        table.row(row);
    }
    if let Some(s) = &sample {
        let stride = scan_stride(s.len());
        let sup = sup_distance_to_cdf(s, stride, |x| law.cdf(x))?
            + (stride - 1) as f64 / s.len() as f64;
        table.footer(&[
            ("sup_distance", fmt(sup)),
            ("trials", s.len().to_string()),
            ("seed", cfg.seed.to_string()),
        ]);
    }
    table.write_to(out)
}

/// Default threshold grid: `μ = E_th / c` log-spaced over `[0.1, 50]`.
fn default_threshold_sweep(params: &SystemParams) -> Result<SweepSpec> {
    let c = params.energy_constant()?;
    Ok(SweepSpec {
        parameter: SweptParameter::EnergyThreshold,
        values: (0..30).map(|i| c * 0.1 * 500f64.powf(i as f64 / 29.0)).collect(),
    })
}

pub fn mean_sweep(cfg: &RunConfig, sweep: Option<&SweepSpec>, out: Option<&Path>) -> Result<()> {
    let sweep = match sweep {
        Some(s) => s.clone(),
        None => default_threshold_sweep(&cfg.params)?,
    };
    sweep.require(&[SweptParameter::EnergyThreshold, SweptParameter::Antennas, SweptParameter::Users])?;
    let trials = cfg.trials_or(100_000);
    let mut table = Table::new([sweep.parameter.column(), "mean_analytic", "mean_mc", "se"]);
    for (i, &v) in sweep.values.iter().enumerate() {
        let params = sweep.apply(&cfg.params, v);
        params.validate()?;
        let analytic = HarvestLaw::new(&params)?.mean();
        let mut run = EnergyRunConfig::new(trials, derive_seed(cfg.seed, i as u64));
        run.bins = 1;
        run.keep_samples = false;
        let mc = run_energy_trials_with(&params, &run)?.mean_energy();
        table.row(vec![fmt(v), fmt(analytic), fmt(mc.mean), fmt(mc.se)]);
    }
    table.footer(&[("trials", trials.to_string()), ("seed", cfg.seed.to_string())]);
    table.write_to(out)
}

pub fn pmf(cfg: &RunConfig, out: Option<&Path>) -> Result<()> {
    let trials = cfg.trials_or(1_000_000);
    let analytic = HarvestLaw::new(&cfg.params)?.pmf();
    let mut run = EnergyRunConfig::new(trials, cfg.seed);
    run.bins = 1;
    run.keep_samples = false;
    let empirical = run_energy_trials_with(&cfg.params, &run)?.empirical_pmf();
    let mut table = Table::new(["m", "analytic", "empirical"]);
    for (m, (a, e)) in analytic.iter().zip(&empirical).enumerate() {
        table.row(vec![(m + 1).to_string(), fmt(*a), fmt(*e)]);
    }
    table.footer(&[
        ("tvd", fmt(total_variation(&analytic, &empirical))),
        ("trials", trials.to_string()),
        ("seed", cfg.seed.to_string()),
    ]);
    table.write_to(out)
}

/// Default threshold grid for the sum-rate: `μ` from 0 to 50.
fn default_sumrate_sweep(params: &SystemParams) -> Result<SweepSpec> {
    let c = params.energy_constant()?;
    Ok(SweepSpec {
        parameter: SweptParameter::EnergyThreshold,
        values: [0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 20.0, 50.0]
            .iter()
            .map(|mu| mu * c)
            .collect(),
    })
}

pub fn sumrate_sweep(
    cfg: &RunConfig,
    sweep: Option<&SweepSpec>,
    users: &[usize],
    out: Option<&Path>,
) -> Result<()> {
    let sweep = match sweep {
        Some(s) => s.clone(),
        None => default_sumrate_sweep(&cfg.params)?,
    };
    sweep.require(&[SweptParameter::EnergyThreshold, SweptParameter::Snr])?;
    let users = if users.is_empty() { vec![cfg.params.users] } else { users.to_vec() };
    let trials = cfg.trials_or(100_000);

    let mut header = vec![sweep.parameter.column().to_string()];
    for k in &users {
        header.push(format!("rate_K{k}"));
        header.push(format!("se_K{k}"));
    }
    // columns[j][i]: estimate for users[j] at grid point i
    let mut columns = Vec::with_capacity(users.len());
    for &k in &users {
        let base = cfg.params.with_users(k);
        base.validate()?;
        let col = match sweep.parameter {
            SweptParameter::EnergyThreshold => {
                let weights = sweep
                    .values
                    .iter()
                    .map(|&e| Ok(HarvestLaw::new(&base.with_energy_threshold(e))?.pmf()))
                    .collect::<Result<Vec<_>>>()?;
                weighted_sumrates(&base, &weights, cfg.snr, trials, cfg.seed)?
            }
            _ => {
                let pmf = vec![HarvestLaw::new(&base)?.pmf()];
                sweep
                    .values
                    .iter()
                    .map(|&snr| Ok(weighted_sumrates(&base, &pmf, snr, trials, cfg.seed)?[0]))
                    .collect::<Result<Vec<_>>>()?
            }
        };
        columns.push(col);
    }
    let mut table = Table::new(header);
    for (i, &v) in sweep.values.iter().enumerate() {
        let mut row = vec![fmt(v)];
        for col in &columns {
            row.extend([fmt(col[i].mean), fmt(col[i].se)]);
        }
        table.row(row);
    }
    let mut footer = vec![("trials", trials.to_string()), ("seed", cfg.seed.to_string())];
    if sweep.parameter == SweptParameter::EnergyThreshold {
        footer.push(("snr", fmt(cfg.snr)));
    }
    table.footer(&footer);
    table.write_to(out)
}

/// Histogram, PMF and rate tables; files in `out` when given, else
/// concatenated on stdout.
pub fn simulate(
    cfg: &RunConfig,
    bins: usize,
    histogram_max: Option<f64>,
    out: Option<&Path>,
) -> Result<()> {
    let mut run = EnergyRunConfig::new(cfg.trials_or(1_000_000), cfg.seed);
    run.bins = bins;
    run.histogram_max = histogram_max;
    run.keep_samples = false;
    run.snr = Some(cfg.snr);
    let stats = run_energy_trials_with(&cfg.params, &run)?;
    if stats.support_violations != 0 {
        bail!("{} trials violated the harvested-energy support bound", stats.support_violations);
    }
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
            stats.write_histogram_csv(open(Some(&dir.join("histogram.csv")))?)?;
            stats.write_pmf_csv(open(Some(&dir.join("pmf.csv")))?)?;
            stats.write_rate_csv(open(Some(&dir.join("rates.csv")))?)?;
        }
        None => {
            let mut w = open(None)?;
            stats.write_histogram_csv(&mut w)?;
            stats.write_pmf_csv(&mut w)?;
            stats.write_rate_csv(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}
