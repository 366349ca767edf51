//! Invariant suite behind `validate`: closed-form self-consistency, Monte
//! Carlo agreement, channel statistics, selection-rule properties and
//! reproducibility. Every check yields one CSV row.

use std::path::Path;

use anyhow::Result;
use beamharvest_core::channel::{draw_realization_with, sorted_partial_sums};
use beamharvest_core::montecarlo::{
    run_energy_trials, sumrate_average, sup_distance_to_cdf, total_variation, weighted_sumrates,
    TrialStats,
};
use beamharvest_core::quadrature::integrate_with_breaks;
use beamharvest_core::rng::{derive_seed, stream_rng};
use beamharvest_core::{select_beams, HarvestLaw, SystemParams};
use clap::ValueEnum;

use crate::args::RunConfig;
use crate::output::{fmt, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Level {
    /// 10^5 trials per Monte Carlo check
    Quick,
    /// 10^6 trials per Monte Carlo check
    Full,
}

impl Level {
    fn trials(self) -> u64 {
        match self {
            Level::Quick => 100_000,
            Level::Full => 1_000_000,
        }
    }
}

const GRID_ANTENNAS: [usize; 3] = [2, 4, 8];
const GRID_MUS: [f64; 4] = [0.25, 1.0, 4.0, 6.0];

struct Check {
    name: String,
    pass: bool,
    value: f64,
    threshold: f64,
}

#[derive(Default)]
struct Report {
    checks: Vec<Check>,
}

impl Report {
    /// Records `value < threshold`.
    fn below(&mut self, name: impl Into<String>, value: f64, threshold: f64) {
        self.checks.push(Check {
            name: name.into(),
            pass: value < threshold,
            value,
            threshold,
        });
    }

    fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }

    fn table(&self) -> Table {
        let mut t = Table::new(["check", "status", "value", "threshold"]);
        for c in &self.checks {
            t.row(vec![
                c.name.clone(),
                if c.pass { "PASS" } else { "FAIL" }.to_string(),
                fmt(c.value),
                fmt(c.threshold),
            ]);
        }
        t.footer(&[
            ("checks", self.checks.len().to_string()),
            ("failures", self.failures().to_string()),
        ]);
        t
    }
}

fn quantile(law: &HarvestLaw<'_>, level: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.0, law.support_cutoff());
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if law.cdf(mid)? < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Worst relative gap between the density and a central difference of the
/// CDF (or survival function in the upper half), at 50 interior quantiles
/// kept away from region boundaries.
fn pdf_derivative_gap(law: &HarvestLaw<'_>) -> Result<f64> {
    let eth = law.energy_threshold().max(law.energy_constant());
    let bounds = law.breakpoints();
    let h = 1e-6 * eth;
    let mut worst: f64 = 0.0;
    for k in 1..=50 {
        let mut x = quantile(law, (k as f64 - 0.5) / 50.0)?;
        if let Some(b) = bounds.iter().find(|b| (x - **b).abs() < 1e-3 * eth) {
            x = b + 1.5e-3 * eth;
        }
        let fd = if law.cdf(x)? <= 0.5 {
            (law.cdf(x + h)? - law.cdf(x - h)?) / (2.0 * h)
        } else {
            (law.sf(x - h)? - law.sf(x + h)?) / (2.0 * h)
        };
        worst = worst.max((fd - law.pdf(x)?).abs() / law.pdf(x)?);
    }
    Ok(worst)
}

fn analytic_checks(report: &mut Report, tag: &str, law: &HarvestLaw<'_>) -> Result<()> {
    let pmf = law.pmf();
    report.below(format!("pmf_sums_to_one{tag}"), (pmf.iter().sum::<f64>() - 1.0).abs(), 1e-10);
    report.below(
        format!("single_beam_two_routes{tag}"),
        (law.single_beam_probability() - law.single_beam_probability_via_region()).abs(),
        1e-10,
    );
    let mut breaks = vec![0.0];
    breaks.extend(law.breakpoints());
    breaks.push(law.support_cutoff());
    let c = law.energy_constant();
    let mut pdf_err = None;
    let q = integrate_with_breaks(
        |x| law.pdf(x).unwrap_or_else(|e| {
            pdf_err.get_or_insert(e);
            f64::NAN
        }),
        &breaks,
        1e-9 / c,
    );
    if let Some(e) = pdf_err {
        return Err(e.into());
    }
    report.below(format!("pdf_integrates_to_one{tag}"), (q.value - 1.0).abs(), 1e-6);
    let mut jump: f64 = 0.0;
    for b in law.breakpoints() {
        jump = jump.max((law.cdf(b * (1.0 + 1e-13))? - law.cdf(b * (1.0 - 1e-13))?).abs());
    }
    report.below(format!("cdf_continuous_at_boundaries{tag}"), jump, 1e-8);
    report.below(format!("pdf_matches_cdf_derivative{tag}"), pdf_derivative_gap(law)?, 1e-4);
    let quad = integrate_with_breaks(|x| law.sf(x).unwrap_or(f64::NAN), &breaks, 1e-12 * c).value;
    report.below(format!("mean_matches_tail_integral{tag}"), (quad - law.mean()).abs() / law.mean(), 1e-6);
    Ok(())
}

fn sampling_checks(
    report: &mut Report,
    tag: &str,
    law: &HarvestLaw<'_>,
    stats: &TrialStats,
    tvd_limit: f64,
) -> Result<()> {
    report.below(format!("mc_pmf_tvd{tag}"), total_variation(&stats.empirical_pmf(), &law.pmf()), tvd_limit);
    let sorted = stats.sorted_samples();
    let stride = sorted.len().div_ceil(200_000).max(1);
    let sup = sup_distance_to_cdf(&sorted, stride, |x| law.cdf(x))?
        + (stride - 1) as f64 / sorted.len() as f64;
    report.below(format!("mc_cdf_sup_distance{tag}"), sup, 0.01);
    let mean = stats.mean_energy();
    report.below(format!("mc_mean_z{tag}"), (mean.mean - law.mean()).abs() / mean.se, 4.0);
    report.below(format!("support_bound_violations{tag}"), stats.support_violations as f64, 1.0);
    Ok(())
}

fn channel_checks(report: &mut Report, n: usize, seed: u64) {
    let p = SystemParams::default();
    let mut rng = stream_rng(derive_seed(seed, 100), 0);
    let mut alphas = Vec::with_capacity(n);
    let mut orth: f64 = 0.0;
    for _ in 0..n {
        let real = draw_realization_with(&p, &mut rng, false);
        orth = orth.max(real.orthonormality_residual());
        alphas.push(real.projections[0]);
    }
    alphas.sort_by(f64::total_cmp);
    let ks = sup_distance_to_cdf(&alphas, 1, |x| Ok(-(-x).exp_m1())).unwrap_or(f64::NAN);
    // 0.1% level: the suite runs dozens of statistical checks per call
    report.below("projection_exponential_ks", ks, 1.9495 / (n as f64).sqrt());
    report.below("beam_orthonormality_residual", orth, 1e-10);
}

/// Selection-rule properties on `n` draws cycling through the grid.
fn selection_checks(report: &mut Report, n: usize, seed: u64) -> Result<()> {
    let mut rng = stream_rng(derive_seed(seed, 101), 0);
    let mut violations = 0;
    let mut points: Vec<(usize, f64)> = Vec::new();
    for big_m in 1..=8 {
        for mu in [0.0, 0.25, 1.0, 4.0, 6.0] {
            points.push((big_m, mu));
        }
    }
    for t in 0..n {
        let (big_m, mu) = points[t % points.len()];
        let p = SystemParams::default().with_antennas(big_m).with_mu(mu);
        let real = draw_realization_with(&p, &mut rng, false);
        let out = select_beams(&p, &real.projections)?;
        let (sorted, sums) = sorted_partial_sums(&real.projections);
        let ma = out.active_count;
        let c = p.energy_constant()?;
        let mut ok = if out.threshold_met {
            (1..=ma).all(|m| sums[m - 1] >= m as f64 * mu)
                && (ma == big_m || sums[ma] < (ma + 1) as f64 * mu)
        } else {
            sums[0] < mu && ma == 1 && out.harvested_energy == c * sorted[0]
        };
        if ma > 1 && ma < big_m {
            let ratio = out.harvested_energy / p.energy_threshold;
            ok &= ratio >= 1.0 - 1e-12 && ratio < 1.0 + 1.0 / ma as f64 + 1e-12;
        }
        ok &= mu != 0.0 || ma == big_m;
        let picked: Vec<f64> = out.active_beams.iter().map(|&i| real.projections[i]).collect();
        ok &= picked == sorted[..ma];
        if !ok {
            violations += 1;
        }
    }
    report.below("selection_rule_violations", violations as f64, 1.0);
    Ok(())
}

fn csv_bytes(stats: &TrialStats) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    stats.write_histogram_csv(&mut buf)?;
    stats.write_pmf_csv(&mut buf)?;
    stats.write_rate_csv(&mut buf)?;
    Ok(buf)
}

fn reproducibility_check(report: &mut Report, params: &SystemParams, seed: u64) -> Result<()> {
    let run = |threads: usize| -> Result<Vec<u8>> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
        pool.install(|| csv_bytes(&run_energy_trials(params, 50_000, seed)?))
    };
    let differ = run(1)? != run(3)?;
    report.below("worker_count_independence", differ as u8 as f64, 1.0);
    Ok(())
}

fn sumrate_checks(report: &mut Report, cfg: &RunConfig, trials: u64) -> Result<()> {
    let avg = sumrate_average(&cfg.params, cfg.snr, trials, cfg.seed)?;
    report.below("sumrate_pmf_weighted_vs_joint_z", avg.discrepancy(), 4.0);
    // more users never hurt an argmax scheduler; compare on the same seed
    let big_m = cfg.params.antennas;
    let few = cfg.params.with_users(big_m);
    let many = cfg.params.with_users(4 * big_m);
    let pmf = vec![HarvestLaw::new(&few)?.pmf()];
    let a = weighted_sumrates(&few, &pmf, cfg.snr, trials, cfg.seed)?[0];
    let b = weighted_sumrates(&many, &pmf, cfg.snr, trials, cfg.seed)?[0];
    report.below("sumrate_more_users_deficit_z", (a.mean - b.mean) / a.se.hypot(b.se), 2.0);
    Ok(())
}

/// Runs the suite, writes the report, and returns the number of failures.
pub fn run(cfg: &RunConfig, level: Level, out: Option<&Path>) -> Result<usize> {
    let trials = cfg.trials_or(level.trials());
    let tvd_limit = match level {
        Level::Quick => 0.01,
        Level::Full => 0.005,
    };
    let mut report = Report::default();
    let mut points: Vec<(String, SystemParams)> = Vec::new();
    for &big_m in &GRID_ANTENNAS {
        for &mu in &GRID_MUS {
            points.push((
                format!("[M={big_m};mu={mu}]"),
                SystemParams::default().with_antennas(big_m).with_mu(mu),
            ));
        }
    }
    points.push(("[configured]".to_string(), cfg.params));
    for (i, (tag, params)) in points.iter().enumerate() {
        let law = HarvestLaw::new(params)?;
        analytic_checks(&mut report, tag, &law)?;
        let stats = run_energy_trials(params, trials, derive_seed(cfg.seed, i as u64))?;
        sampling_checks(&mut report, tag, &law, &stats, tvd_limit)?;
    }
    let draws = trials.min(100_000) as usize;
    channel_checks(&mut report, draws, cfg.seed);
    selection_checks(&mut report, draws, cfg.seed)?;
    reproducibility_check(&mut report, &cfg.params, cfg.seed)?;
    sumrate_checks(&mut report, cfg, (trials / 10).max(1000))?;
    report.table().write_to(out)?;
    for c in report.checks.iter().filter(|c| !c.pass) {
        eprintln!("FAIL {}: {} (threshold {})", c.name, c.value, c.threshold);
    }
    eprintln!("validate: {} checks, {} failed", report.checks.len(), report.failures());
    Ok(report.failures())
}
