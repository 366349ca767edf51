use std::io::Write;

use crate::analytic::format_sig17;
use crate::error::Result;

/// Fixed-width histogram with under/overflow counters.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        assert!(hi > lo && bins > 0, "histogram needs hi > lo and bins > 0");
        Histogram {
            lo,
            hi,
            counts: vec![0; bins],
            underflow: 0,
            overflow: 0,
        }
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins() as f64
    }

    pub fn edges(&self) -> Vec<f64> {
        (0..=self.bins()).map(|i| self.lo + i as f64 * self.width()).collect()
    }

    pub fn add(&mut self, x: f64) {
        if x < self.lo {
            self.underflow += 1;
        } else if x >= self.hi {
            self.overflow += 1;
        } else {
            let idx = (((x - self.lo) / self.width()) as usize).min(self.bins() - 1);
            self.counts[idx] += 1;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.underflow + self.overflow
    }

    /// Density estimate per bin, normalized by the total count.
    pub fn density(&self) -> Vec<f64> {
        let n = self.total() as f64;
        let w = self.width();
        self.counts.iter().map(|&c| c as f64 / (n * w)).collect()
    }

    pub fn merge(&mut self, other: &Histogram) {
        assert_eq!(self.counts.len(), other.counts.len());
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.underflow += other.underflow;
        self.overflow += other.overflow;
    }
}

/// Mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub mean: f64,
    pub se: f64,
    pub trials: u64,
}

impl RateEstimate {
    pub fn from_sums(sum: f64, sq_sum: f64, n: u64) -> Self {
        if n == 0 {
            return RateEstimate { mean: f64::NAN, se: f64::NAN, trials: 0 };
        }
        let nf = n as f64;
        let mean = sum / nf;
        let var = if n > 1 {
            ((sq_sum - nf * mean * mean) / (nf - 1.0)).max(0.0)
        } else {
            0.0
        };
        RateEstimate {
            mean,
            se: (var / nf).sqrt(),
            trials: n,
        }
    }
}

/// Accumulators of one Monte Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialStats {
    pub trials: u64,
    pub seed: u64,
    pub histogram: Histogram,
    /// Harvested energies in trial order; empty unless requested.
    pub samples: Vec<f64>,
    /// `pmf_counts[m-1]` trials ended with `m` active beams.
    pub pmf_counts: Vec<u64>,
    pub energy_sum: f64,
    pub energy_sq_sum: f64,
    pub sumrate_sum: f64,
    pub sumrate_sq_sum: f64,
    /// Sum-rate totals split by active beam count.
    pub per_beamcount_rate_sums: Vec<f64>,
    /// Trials with `1 < M_a < M` whose energy left `[E_th, (1+1/M_a) E_th)`.
    pub support_violations: u64,
}

impl TrialStats {
    pub fn new(antennas: usize, seed: u64, histogram: Histogram) -> Self {
        TrialStats {
            trials: 0,
            seed,
            histogram,
            samples: Vec::new(),
            pmf_counts: vec![0; antennas],
            energy_sum: 0.0,
            energy_sq_sum: 0.0,
            sumrate_sum: 0.0,
            sumrate_sq_sum: 0.0,
            per_beamcount_rate_sums: vec![0.0; antennas],
            support_violations: 0,
        }
    }

    /// Adds `other`; merging chunks in a fixed order keeps results exact
    /// across runs.
    pub fn merge(&mut self, other: &TrialStats) {
        self.trials += other.trials;
        self.histogram.merge(&other.histogram);
        self.samples.extend_from_slice(&other.samples);
        for (a, b) in self.pmf_counts.iter_mut().zip(&other.pmf_counts) {
            *a += b;
        }
        self.energy_sum += other.energy_sum;
        self.energy_sq_sum += other.energy_sq_sum;
        self.sumrate_sum += other.sumrate_sum;
        self.sumrate_sq_sum += other.sumrate_sq_sum;
        for (a, b) in self.per_beamcount_rate_sums.iter_mut().zip(&other.per_beamcount_rate_sums) {
            *a += b;
        }
        self.support_violations += other.support_violations;
    }

    pub fn empirical_pmf(&self) -> Vec<f64> {
        let n = self.trials as f64;
        self.pmf_counts.iter().map(|&c| c as f64 / n).collect()
    }

    pub fn mean_energy(&self) -> RateEstimate {
        RateEstimate::from_sums(self.energy_sum, self.energy_sq_sum, self.trials)
    }

    pub fn mean_sumrate(&self) -> RateEstimate {
        RateEstimate::from_sums(self.sumrate_sum, self.sumrate_sq_sum, self.trials)
    }

    /// Mean sum-rate given `m` active beams, where observed.
    pub fn conditional_rate(&self, m: usize) -> Option<f64> {
        let n = self.pmf_counts[m - 1];
        (n > 0).then(|| self.per_beamcount_rate_sums[m - 1] / n as f64)
    }

    pub fn sorted_samples(&self) -> Vec<f64> {
        let mut s = self.samples.clone();
        s.sort_by(f64::total_cmp);
        s
    }

    /// `lo,hi,count,density` rows plus underflow/overflow rows.
    pub fn write_histogram_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["lo", "hi", "count", "density"])?;
        let edges = self.histogram.edges();
        let dens = self.histogram.density();
        for (i, c) in self.histogram.counts.iter().enumerate() {
            w.write_record([
                format_sig17(edges[i]),
                format_sig17(edges[i + 1]),
                c.to_string(),
                format_sig17(dens[i]),
            ])?;
        }
        w.write_record(["-inf".to_string(), format_sig17(self.histogram.lo), self.histogram.underflow.to_string(), String::new()])?;
        w.write_record([format_sig17(self.histogram.hi), "inf".to_string(), self.histogram.overflow.to_string(), String::new()])?;
        w.flush()?;
        Ok(())
    }

    /// `m,count,probability` rows.
    pub fn write_pmf_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["m", "count", "probability"])?;
        for (i, (c, p)) in self.pmf_counts.iter().zip(self.empirical_pmf()).enumerate() {
            w.write_record([(i + 1).to_string(), c.to_string(), format_sig17(p)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// `quantity,mean,se,trials` rows for the energy and, when recorded, the
    /// sum-rate (overall and per active beam count).
    pub fn write_rate_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["quantity", "mean", "se", "trials"])?;
        let e = self.mean_energy();
        w.write_record(["energy_j".to_string(), format_sig17(e.mean), format_sig17(e.se), e.trials.to_string()])?;
        let r = self.mean_sumrate();
        w.write_record(["sumrate".to_string(), format_sig17(r.mean), format_sig17(r.se), r.trials.to_string()])?;
        for m in 1..=self.pmf_counts.len() {
            let mean = self.conditional_rate(m).unwrap_or(f64::NAN);
            w.write_record([format!("sumrate_m{m}"), format_sig17(mean), String::new(), self.pmf_counts[m - 1].to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Half the L1 distance between two probability vectors.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// `sup |F(x) - F_n(x)|` over probe points taken every `stride` order
/// statistics of `sorted`, checking both one-sided limits of the empirical
/// CDF. The true supremum exceeds the result by at most `stride / n`.
pub fn sup_distance_to_cdf<F>(sorted: &[f64], stride: usize, mut cdf: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let n = sorted.len();
    let nf = n as f64;
    let stride = stride.max(1);
    let mut worst: f64 = 0.0;
    let mut idx = 0;
    while idx < n {
        let x = sorted[idx];
        // ties: F_n jumps from lo/n to hi/n at x
        let lo = sorted.partition_point(|v| *v < x);
        let hi = sorted.partition_point(|v| *v <= x);
        let f = cdf(x)?;
        worst = worst.max((f - lo as f64 / nf).abs()).max((f - hi as f64 / nf).abs());
        idx = hi.max(idx + stride);
    }
    Ok(worst)
}
