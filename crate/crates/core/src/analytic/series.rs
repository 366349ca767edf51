//! Factorial tables, compensated summation and integer-order incomplete gamma
//! pieces shared by every closed-form evaluator.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Default antenna cap for the closed-form series.
pub const DEFAULT_MAX_ANTENNAS: usize = 10;

/// Immutable tables for the alternating factorial/binomial series.
///
/// Term magnitudes grow combinatorially with the antenna count, so
/// evaluation is refused beyond `max_antennas`.
#[derive(Debug, Clone)]
pub struct SeriesWorkspace {
    ln_factorials: Vec<f64>,
    max_antennas: usize,
}

impl Default for SeriesWorkspace {
    fn default() -> Self {
        Self::new(DEFAULT_MAX_ANTENNAS)
    }
}

impl SeriesWorkspace {
    pub fn new(max_antennas: usize) -> Self {
        // partial-sum moments reach (2M + 2)!
        let len = 2 * max_antennas + 8;
        let mut ln_factorials = Vec::with_capacity(len);
        let mut fact = 1.0f64;
        for n in 0..len {
            if n > 0 {
                fact *= n as f64;
            }
            ln_factorials.push(fact.ln());
        }
        SeriesWorkspace {
            ln_factorials,
            max_antennas,
        }
    }

    /// Process-wide workspace with the default cap.
    pub fn shared() -> &'static SeriesWorkspace {
        static SHARED: OnceLock<SeriesWorkspace> = OnceLock::new();
        SHARED.get_or_init(SeriesWorkspace::default)
    }

    pub fn max_antennas(&self) -> usize {
        self.max_antennas
    }

    pub fn check_antennas(&self, antennas: usize) -> Result<()> {
        if antennas == 0 {
            return Err(Error::InvalidParameter {
                name: "antennas",
                reason: "must be at least 1".into(),
            });
        }
        if antennas > self.max_antennas {
            return Err(Error::UnsupportedAntennas {
                requested: antennas,
                max: self.max_antennas,
            });
        }
        Ok(())
    }

    #[inline]
    pub fn ln_factorial(&self, n: usize) -> f64 {
        self.ln_factorials[n]
    }

    #[inline]
    pub fn factorial(&self, n: usize) -> f64 {
        self.ln_factorials[n].exp()
    }

    /// `n! / (n-k)!`.
    #[inline]
    pub fn falling(&self, n: usize, k: usize) -> f64 {
        (self.ln_factorials[n] - self.ln_factorials[n - k]).exp()
    }

    /// Binomial coefficient, rounded to the exact integer.
    #[inline]
    pub fn binomial(&self, n: usize, k: usize) -> f64 {
        (self.ln_factorials[n] - self.ln_factorials[k] - self.ln_factorials[n - k])
            .exp()
            .round()
    }

    /// `y^k / k!` without intermediate overflow.
    #[inline]
    pub fn power_over_factorial(&self, y: f64, k: usize) -> f64 {
        if k == 0 {
            1.0
        } else if y == 0.0 {
            0.0
        } else {
            (k as f64 * y.ln() - self.ln_factorials[k]).exp()
        }
    }

    /// `e^{-y} y^k / k!`, the Poisson weight.
    #[inline]
    pub fn poisson_weight(&self, y: f64, k: usize) -> f64 {
        if y == 0.0 {
            return if k == 0 { 1.0 } else { 0.0 };
        }
        (k as f64 * y.ln() - y - self.ln_factorials[k]).exp()
    }

    /// Regularized lower incomplete gamma `P(k, y)` for integer `k >= 1`,
    /// i.e. the Erlang-`k` CDF at `y`.
    pub fn erlang_cdf(&self, k: usize, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        if y < (k + 1) as f64 {
            self.erlang_cdf_series(k, y)
        } else {
            1.0 - self.erlang_tail_sum(k, y)
        }
    }

    /// `Q(k, y) = 1 - P(k, y) = e^{-y} Σ_{r<k} y^r / r!`.
    pub fn erlang_tail(&self, k: usize, y: f64) -> f64 {
        if y <= 0.0 {
            return 1.0;
        }
        if y < (k + 1) as f64 {
            1.0 - self.erlang_cdf_series(k, y)
        } else {
            self.erlang_tail_sum(k, y)
        }
    }

    /// Erlang-`k` density at `y`.
    pub fn erlang_pdf(&self, k: usize, y: f64) -> f64 {
        if y < 0.0 {
            0.0
        } else {
            self.poisson_weight(y, k - 1)
        }
    }

    fn erlang_tail_sum(&self, k: usize, y: f64) -> f64 {
        (0..k).map(|r| self.poisson_weight(y, r)).sum()
    }

    // e^{-y} Σ_{r>=k} y^r/r!, all terms positive
    fn erlang_cdf_series(&self, k: usize, y: f64) -> f64 {
        let lead = self.poisson_weight(y, k);
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut r = k;
        loop {
            r += 1;
            term *= y / r as f64;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        lead * sum
    }

    /// `∫_0^d a^n e^{-β a} da` for `β >= 0`, `d >= 0`.
    pub fn exp_moment(&self, beta: f64, n: usize, d: f64) -> f64 {
        if d <= 0.0 {
            return 0.0;
        }
        if beta == 0.0 {
            return d.powi(n as i32 + 1) / (n + 1) as f64;
        }
        (self.ln_factorials[n] - (n + 1) as f64 * beta.ln()).exp() * self.erlang_cdf(n + 1, beta * d)
    }

    /// `e^{-y} - Σ_{t<k} (-y)^t / t!`, the Taylor remainder of `e^{-y}` after
    /// `k` terms.
    pub fn exp_taylor_remainder(&self, k: usize, y: f64) -> f64 {
        if y <= (k + 1) as f64 {
            // Σ_{t>=k} (-y)^t/t!, leading term dominant
            let mut term = if k == 0 {
                1.0
            } else {
                let mag = self.power_over_factorial(y, k);
                if k.is_multiple_of(2) { mag } else { -mag }
            };
            let mut acc = CompensatedSum::new();
            let mut t = k;
            loop {
                acc.add(term);
                t += 1;
                term *= -y / t as f64;
                if term.abs() < 1e-18 * acc.value().abs().max(f64::MIN_POSITIVE) || t > k + 400 {
                    break;
                }
            }
            acc.value()
        } else {
            let mut acc = CompensatedSum::new();
            acc.add((-y).exp());
            let mut term = 1.0;
            for t in 0..k {
                if t > 0 {
                    term *= -y / t as f64;
                }
                acc.add(-term);
            }
            acc.value()
        }
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Collects the terms of an alternating series and adds them in descending
/// magnitude with compensation.
#[derive(Debug, Clone, Default)]
pub struct TermSum {
    terms: Vec<f64>,
}

impl TermSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, t: f64) {
        if t != 0.0 {
            self.terms.push(t);
        }
    }

    /// Sum of absolute values, the conditioning denominator.
    pub fn magnitude(&self) -> f64 {
        self.terms.iter().map(|t| t.abs()).sum()
    }

    pub fn value(mut self) -> f64 {
        self.terms.sort_unstable_by(|a, b| b.abs().total_cmp(&a.abs()));
        let mut acc = CompensatedSum::new();
        for t in &self.terms {
            acc.add(*t);
        }
        acc.value()
    }
}
