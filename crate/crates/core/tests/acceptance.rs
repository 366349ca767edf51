//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs without the libtest harness so every line is printed.

use std::time::{Duration, Instant};

use beamharvest_core::analytic::{joint_pdf_next_and_sum, pdf_z1, pdf_zm};
use beamharvest_core::channel::{draw_realization_with, sorted_partial_sums};
use beamharvest_core::montecarlo::{
    run_energy_trials, sumrate_average, sup_distance_to_cdf, total_variation, TrialStats,
};
use beamharvest_core::quadrature::{exponential_tail_cutoff, integrate, integrate_with_breaks};
use beamharvest_core::rng::stream_rng;
use beamharvest_core::{select_beams, HarvestLaw, SystemParams};
use rand::Rng;

/// Default downlink SNR of the sum-rate study (10 dB).
const SNR: f64 = 10.0;
const GRID_ANTENNAS: [usize; 3] = [2, 4, 8];
const GRID_MUS: [f64; 4] = [0.25, 1.0, 4.0, 6.0];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn params(antennas: usize, mu: f64) -> SystemParams {
    SystemParams::default().with_antennas(antennas).with_mu(mu)
}

fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("thread pool")
        .install(f)
}

fn energy_breaks(law: &HarvestLaw<'_>) -> Vec<f64> {
    let mut pts = vec![0.0];
    pts.extend(law.breakpoints());
    pts.push(law.support_cutoff());
    pts
}

fn pmf_agreement() -> Outcome {
    let p = SystemParams::default().with_antennas(8);
    let start = Instant::now();
    let stats = single_threaded(|| run_energy_trials(&p, 1_000_000, 1).unwrap());
    let elapsed = start.elapsed();
    let pmf = HarvestLaw::new(&p).unwrap().pmf();
    let tvd = total_variation(&stats.empirical_pmf(), &pmf);
    outcome(
        tvd < 0.005 && elapsed <= Duration::from_secs(60),
        format!("M=8 mu=6: TVD {tvd:.2e} (< 5e-3), {:.1} s single-threaded (<= 60 s)", elapsed.as_secs_f64()),
    )
}

/// One 10⁶-trial run per grid point, shared by the CDF and mean criteria.
fn grid_runs() -> Vec<(usize, f64, TrialStats)> {
    let mut out = Vec::new();
    for (i, &big_m) in GRID_ANTENNAS.iter().enumerate() {
        for (j, &mu) in GRID_MUS.iter().enumerate() {
            let seed = 1000 + (i * 10 + j) as u64;
            out.push((big_m, mu, run_energy_trials(&params(big_m, mu), 1_000_000, seed).unwrap()));
        }
    }
    out
}

fn quantile(law: &HarvestLaw<'_>, level: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, law.support_cutoff());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if law.cdf(mid).unwrap() < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn cdf_pdf_oracle(runs: &[(usize, f64, TrialStats)], started: Instant) -> Outcome {
    let stride = 50;
    let mut worst_sup: f64 = 0.0;
    let mut worst_rel: f64 = 0.0;
    for (big_m, mu, stats) in runs {
        let law = HarvestLaw::new(&params(*big_m, *mu)).unwrap();
        let sorted = stats.sorted_samples();
        let sup = sup_distance_to_cdf(&sorted, stride, |x| law.cdf(x)).unwrap()
            + stride as f64 / sorted.len() as f64;
        worst_sup = worst_sup.max(sup);

        let eth = law.energy_threshold();
        let bounds = law.breakpoints();
        let h = 1e-6 * eth;
        // probes at interior quantiles of the law, moved off boundary
        // neighborhoods of width 1e-3 E_th
        for k in 1..=100 {
            let mut x = quantile(&law, (k as f64 - 0.5) / 100.0);
            if let Some(b) = bounds.iter().find(|b| (x - **b).abs() < 1e-3 * eth) {
                x = b + 1.5e-3 * eth;
            }
            // difference whichever tail is smaller to keep relative precision
            let fd = if law.cdf(x).unwrap() <= 0.5 {
                (law.cdf(x + h).unwrap() - law.cdf(x - h).unwrap()) / (2.0 * h)
            } else {
                (law.sf(x - h).unwrap() - law.sf(x + h).unwrap()) / (2.0 * h)
            };
            let f = law.pdf(x).unwrap();
            worst_rel = worst_rel.max((fd - f).abs() / f);
        }
    }
    let elapsed = started.elapsed();
    outcome(
        worst_sup < 0.01 && worst_rel < 1e-4 && elapsed <= Duration::from_secs(600),
        format!(
            "max sup|F-F_n| {worst_sup:.2e} (< 1e-2), max pdf-vs-dF/dx rel {worst_rel:.1e} (< 1e-4), grid {:.0} s (<= 600 s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn mean_consistency(runs: &[(usize, f64, TrialStats)]) -> Outcome {
    let mut worst_quad: f64 = 0.0;
    let mut worst_z: f64 = 0.0;
    for (big_m, mu, stats) in runs {
        let law = HarvestLaw::new(&params(*big_m, *mu)).unwrap();
        let mean = law.mean();
        let quad = integrate_with_breaks(|x| x * law.pdf(x).unwrap(), &energy_breaks(&law), 1e-9 * law.energy_constant());
        worst_quad = worst_quad.max((quad.value - mean).abs() / mean);
        let mc = stats.mean_energy();
        worst_z = worst_z.max((mc.mean - mean).abs() / mc.se);
    }
    outcome(
        worst_quad < 1e-4 && worst_z < 3.0,
        format!("closed form vs quadrature rel {worst_quad:.1e} (< 1e-4), vs MC {worst_z:.2} SE (< 3)"),
    )
}

fn limit_laws() -> Outcome {
    let c = SystemParams::default().energy_constant().unwrap();
    let mut worst_low: f64 = 0.0;
    let mut worst_high: f64 = 0.0;
    for (i, &big_m) in GRID_ANTENNAS.iter().enumerate() {
        let tiny = HarvestLaw::new(&params(big_m, 1e-9)).unwrap().mean();
        let zero_mc = run_energy_trials(&params(big_m, 0.0), 200_000, 40 + i as u64).unwrap().mean_energy().mean;
        worst_low = worst_low.max(((tiny - c) / c).abs()).max(((zero_mc - c) / c).abs());
        let harmonic: f64 = (1..=big_m).map(|s| 1.0 / s as f64).sum();
        let far_mc = run_energy_trials(&params(big_m, 50.0), 1_000_000, 50 + i as u64).unwrap().mean_energy().mean;
        worst_high = worst_high.max((far_mc / (c * harmonic) - 1.0).abs());
    }
    outcome(
        worst_low < 0.005 && worst_high < 0.01,
        format!("E_th->0: mean/c off by {worst_low:.1e} (< 5e-3); mu=50 MC: mean/(c H_M) off by {worst_high:.1e} (< 1e-2)"),
    )
}

fn mean_trends() -> Outcome {
    let mut monotone = true;
    for big_m in GRID_ANTENNAS {
        let means: Vec<f64> = (0..30)
            .map(|i| HarvestLaw::new(&params(big_m, 20.0 * i as f64 / 29.0)).unwrap().mean())
            .collect();
        monotone &= means.windows(2).all(|w| w[1] >= w[0]);
    }
    let n = 400;
    let mut crossings = Vec::new();
    let mut prev: Option<f64> = None;
    for i in 0..n {
        let mu = 0.1 * (200.0f64).powf(i as f64 / (n - 1) as f64);
        let d = HarvestLaw::new(&params(8, mu)).unwrap().mean() - HarvestLaw::new(&params(2, mu)).unwrap().mean();
        if let Some(p) = prev {
            if (p < 0.0) != (d < 0.0) {
                crossings.push(mu);
            }
        }
        prev = Some(d);
    }
    outcome(
        monotone && crossings.len() == 1,
        format!(
            "mean non-decreasing on 30-point sweeps for M in {{2,4,8}}: {monotone}; M=2 vs M=8 crossings on mu in [0.1,20]: {} at {:?}",
            crossings.len(),
            crossings.iter().map(|m| format!("{m:.3}")).collect::<Vec<_>>()
        ),
    )
}

fn sumrate_trends() -> Outcome {
    let mus = [0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 20.0, 50.0];
    let trials = 100_000;
    let mut curves = Vec::new();
    let mut notes = Vec::new();
    let mut non_increasing = true;
    let mut converges = true;
    let mut agree = true;
    for users in [4usize, 16] {
        let curve: Vec<_> = mus
            .iter()
            .map(|&mu| {
                let p = SystemParams::default().with_users(users).with_mu(mu);
                sumrate_average(&p, SNR, trials, 7).unwrap()
            })
            .collect();
        let mut rises = 0;
        for w in curve.windows(2) {
            let (a, b) = (w[0].analytic, w[1].analytic);
            if b.mean > a.mean + 2.0 * a.se.hypot(b.se) {
                rises += 1;
            }
        }
        non_increasing &= rises == 0;
        let last = curve.last().unwrap();
        let r1 = last.conditional[0];
        converges &= (last.analytic.mean - r1.mean).abs() <= 2.0 * r1.se.max(last.analytic.se);
        agree &= curve.iter().all(|c| c.discrepancy() < 3.0);
        notes.push(format!(
            "K={users}: R({}) -> R({}) = {:.3} -> {:.3}, {rises} rises > 2 SE, R_1 = {:.3}",
            mus[0],
            mus[mus.len() - 1],
            curve[0].analytic.mean,
            last.analytic.mean,
            r1.mean
        ));
        curves.push(curve);
    }
    let dominates = curves[0]
        .iter()
        .zip(&curves[1])
        .all(|(k4, k16)| k16.analytic.mean >= k4.analytic.mean - 2.0 * k4.analytic.se.hypot(k16.analytic.se));
    outcome(
        non_increasing && converges && dominates && agree,
        format!(
            "snr {SNR}: non-increasing in E_th {non_increasing}, converges to R_1 {converges}, K=16 >= K=4 {dominates}, PMF-weighted vs joint within 3 SE {agree}; {}",
            notes.join("; ")
        ),
    )
}

fn normalizations() -> Outcome {
    let mut worst_z: f64 = 0.0;
    let mut worst_eh: f64 = 0.0;
    for big_m in 1..=8 {
        let top = exponential_tail_cutoff(big_m, 1.0, 1e-16);
        let z1 = integrate(|x| pdf_z1(big_m, x).unwrap(), 0.0, top, 1e-12).value;
        worst_z = worst_z.max((z1 - 1.0).abs());
        for m in 1..=big_m {
            if m >= 2 {
                let zm = integrate(|x| pdf_zm(big_m, m, x).unwrap(), 0.0, top, 1e-12).value;
                worst_z = worst_z.max((zm - 1.0).abs());
            }
            if m < big_m {
                let joint = integrate(
                    |y| integrate(|x| joint_pdf_next_and_sum(big_m, m, x, y).unwrap(), 0.0, y / m as f64, 1e-13).value,
                    0.0,
                    top,
                    1e-11,
                )
                .value;
                worst_z = worst_z.max((joint - 1.0).abs());
            }
        }
        for mu in GRID_MUS {
            let law = HarvestLaw::new(&params(big_m, mu)).unwrap();
            let q = integrate_with_breaks(|x| law.pdf(x).unwrap(), &energy_breaks(&law), 1e-9 / law.energy_constant());
            worst_eh = worst_eh.max((q.value - 1.0).abs());
        }
    }
    outcome(
        worst_z < 1e-6 && worst_eh < 1e-3,
        format!("z-densities (best, partial sums, joint) off by {worst_z:.1e} (< 1e-6); E_H density off by {worst_eh:.1e} (< 1e-3)"),
    )
}

fn channel_statistics() -> Outcome {
    let p = SystemParams::default();
    let mut rng = stream_rng(8, 0);
    let n = 100_000;
    let mut alphas = Vec::with_capacity(n);
    let mut worst_orth: f64 = 0.0;
    for _ in 0..n {
        let real = draw_realization_with(&p, &mut rng, false);
        worst_orth = worst_orth.max(real.orthonormality_residual());
        alphas.push(real.projections[0]);
    }
    alphas.sort_by(f64::total_cmp);
    let ks = sup_distance_to_cdf(&alphas, 1, |x| Ok(-(-x).exp_m1())).unwrap();
    let critical = 1.6276 / (n as f64).sqrt();
    outcome(
        ks < critical && worst_orth < 1e-10,
        format!("KS {ks:.2e} (< {critical:.2e} at 1%), orthonormality residual {worst_orth:.1e} (< 1e-10)"),
    )
}

fn selection_properties() -> Outcome {
    let mut rng = stream_rng(9, 0);
    let mut violations = Vec::new();
    let trials = 100_000;
    for t in 0..trials {
        let big_m = rng.random_range(1..=8usize);
        let mu = if t % 10 == 0 { 0.0 } else { rng.random_range(0.0..10.0) };
        let p = params(big_m, mu);
        let real = draw_realization_with(&p, &mut rng, false);
        let out = select_beams(&p, &real.projections).unwrap();
        let (sorted, sums) = sorted_partial_sums(&real.projections);
        let c = p.energy_constant().unwrap();
        let eth = p.energy_threshold;
        let ma = out.active_count;
        let mut bad = Vec::new();
        if out.threshold_met {
            if !(1..=ma).all(|m| sums[m - 1] >= m as f64 * mu) {
                bad.push("prefix");
            }
            if ma < big_m && sums[ma] >= (ma + 1) as f64 * mu {
                bad.push("maximality");
            }
        } else if !(sums[0] < mu && ma == 1 && out.harvested_energy == c * sorted[0]) {
            bad.push("fallback");
        }
        if (sums[0] < mu) == out.threshold_met {
            bad.push("threshold flag");
        }
        if ma > 1 && ma < big_m {
            let ratio = out.harvested_energy / eth;
            if !(ratio >= 1.0 - 1e-12 && ratio < 1.0 + 1.0 / ma as f64 + 1e-12) {
                bad.push("support bound");
            }
        }
        if mu == 0.0 && ma != big_m {
            bad.push("zero threshold");
        }
        let picked: Vec<f64> = out.active_beams.iter().map(|&i| real.projections[i]).collect();
        if picked != sorted[..ma] {
            bad.push("strongest beams");
        }
        if !bad.is_empty() {
            violations.push((t, bad));
        }
    }
    outcome(
        violations.is_empty(),
        format!("{trials} randomized trials, {} violations{}", violations.len(), match violations.first() {
            Some((t, b)) => format!(" (first: trial {t} {b:?})"),
            None => String::new(),
        }),
    )
}

fn csv_bytes(stats: &TrialStats) -> Vec<u8> {
    let mut buf = Vec::new();
    stats.write_histogram_csv(&mut buf).unwrap();
    stats.write_pmf_csv(&mut buf).unwrap();
    stats.write_rate_csv(&mut buf).unwrap();
    buf
}

fn reproducibility() -> Outcome {
    let p = params(6, 2.5);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| csv_bytes(&run_energy_trials(&p, 200_000, 2718).unwrap()))
    };
    let one = run(1);
    let many = run(4);
    outcome(
        one == many,
        format!("1 vs 4 workers, 200000 trials: {} CSV bytes, identical {}", one.len(), one == many),
    )
}

fn main() {
    let mut failures = 0;
    let mut report = |id: u32, name: &str, o: Outcome| {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {tag} {name}: {}", o.detail);
        if !o.pass {
            failures += 1;
        }
    };
    report(1, "active-beam PMF", pmf_agreement());
    let started = Instant::now();
    let runs = grid_runs();
    report(2, "CDF/PDF oracle", cdf_pdf_oracle(&runs, started));
    report(3, "mean consistency", mean_consistency(&runs));
    drop(runs);
    report(4, "limit laws", limit_laws());
    report(5, "mean trends", mean_trends());
    report(6, "sum-rate trends", sumrate_trends());
    report(7, "density normalizations", normalizations());
    report(8, "channel statistics", channel_statistics());
    report(9, "selection rule", selection_properties());
    report(10, "reproducibility", reproducibility());
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
