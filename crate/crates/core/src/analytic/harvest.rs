//! Closed-form law of the energy harvested in one coherence interval.
//!
//! Work is done in units of the energy constant `c`: with `ν = x / c` the
//! harvested energy falls below `x` through exactly one of three routes.
//!
//! * Best-beam fallback, `z_1 < μ`: contributes `(1 - e^{-min(ν, μ)})^M`.
//! * `m` beams active for `1 <= m < M`: `z_m >= mμ` and
//!   `z_m + α_{m+1:M} < (m+1)μ`, with `E_H = c z_m / m`. This piece lives on
//!   `[E_th, (1 + 1/m) E_th)` and is an integral of the joint density of
//!   `(α_{m+1:M}, z_m)` over a triangle-like region.
//! * All `M` beams, `z_M >= Mμ`: an Erlang-`M` tail.
//!
//! Region integrals are expanded into finite alternating series: the kernel
//! `(w - m a)^{m-1}` binomially in `w` and `a`, the `w`-integral into
//! incomplete-gamma sums, and `(L - a)^p` binomially once more, leaving only
//! `∫_0^D a^n e^{-β a} da` pieces.

use super::series::{SeriesWorkspace, TermSum};
use crate::error::{out_of_range, Result};
use crate::params::SystemParams;

/// Which closed-form piece governs an energy value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    /// `x < E_th`: only the best-beam fallback contributes density.
    BelowThreshold,
    /// `E_th <= x < (1 + 1/m) E_th` with `m` the largest such beam count;
    /// the middle pieces `1..=m` contribute.
    Middle(usize),
    /// Beyond every middle piece; only the all-beams tail remains.
    AboveBestOnly,
}

impl Region {
    pub fn label(&self) -> String {
        match self {
            Region::BelowThreshold => "below_eth".to_string(),
            Region::Middle(m) => format!("middle_{m}"),
            Region::AboveBestOnly => "above_best_only".to_string(),
        }
    }

    pub fn parse(label: &str) -> Option<Region> {
        match label {
            "below_eth" => Some(Region::BelowThreshold),
            "above_best_only" => Some(Region::AboveBestOnly),
            other => other
                .strip_prefix("middle_")
                .and_then(|m| m.parse().ok())
                .map(Region::Middle),
        }
    }
}

/// Distribution of the harvested energy for one parameter set.
#[derive(Debug, Clone, Copy)]
pub struct HarvestLaw<'w> {
    ws: &'w SeriesWorkspace,
    antennas: usize,
    mu: f64,
    c: f64,
}

impl HarvestLaw<'static> {
    pub fn new(params: &SystemParams) -> Result<Self> {
        HarvestLaw::with_workspace(SeriesWorkspace::shared(), params)
    }
}

impl<'w> HarvestLaw<'w> {
    pub fn with_workspace(ws: &'w SeriesWorkspace, params: &SystemParams) -> Result<Self> {
        let mu = params.mu()?;
        let c = params.energy_constant()?;
        ws.check_antennas(params.antennas)?;
        Ok(HarvestLaw {
            ws,
            antennas: params.antennas,
            mu,
            c,
        })
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn energy_constant(&self) -> f64 {
        self.c
    }

    pub fn energy_threshold(&self) -> f64 {
        self.mu * self.c
    }

    /// Region boundaries `E_th` and `(1 + 1/m) E_th`, ascending. Empty when
    /// the threshold is zero.
    pub fn breakpoints(&self) -> Vec<f64> {
        if self.mu == 0.0 {
            return Vec::new();
        }
        let eth = self.energy_threshold();
        let mut pts = vec![eth];
        for m in (1..self.antennas).rev() {
            pts.push(eth * (m + 1) as f64 / m as f64);
        }
        pts
    }

    /// Energy beyond which the density is below `1e-14` of its scale:
    /// `E_H <= c z_1` and `P[z_1 > ν] <= M e^{-ν}`.
    pub fn support_cutoff(&self) -> f64 {
        let nu = (self.antennas as f64).ln() + 14.0 * std::f64::consts::LN_10 + 2.0;
        let lower = self.breakpoints().last().copied().unwrap_or(0.0);
        (self.c * nu).max(2.0 * lower)
    }

    pub fn region(&self, x: f64) -> Region {
        if self.mu == 0.0 {
            return Region::AboveBestOnly;
        }
        let eth = self.energy_threshold();
        if x < eth {
            return Region::BelowThreshold;
        }
        let nu = x / self.c;
        (1..self.antennas)
            .rev()
            .find(|&m| m as f64 * nu < (m + 1) as f64 * self.mu)
            .map(Region::Middle)
            .unwrap_or(Region::AboveBestOnly)
    }

    fn check_energy(x: f64) -> Result<()> {
        if x >= 0.0 && !x.is_nan() {
            Ok(())
        } else {
            Err(out_of_range("energy", x, ">= 0 J"))
        }
    }

    /// `P[E_H < x]`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        Self::check_energy(x)?;
        let big_m = self.antennas;
        let nu = x / self.c;
        if nu.is_infinite() {
            return Ok(1.0);
        }
        if self.mu == 0.0 {
            return Ok(self.ws.erlang_cdf(big_m, big_m as f64 * nu));
        }
        let mu = self.mu;
        if nu < mu {
            return Ok((-(-nu).exp_m1()).powi(big_m as i32));
        }
        let mut total = TermSum::new();
        total.push((-(-mu).exp_m1()).powi(big_m as i32));
        for m in 1..big_m {
            let full = self.region_integral(m, m as f64 * mu, 0);
            let b = m as f64 * nu;
            let above = if b < (m + 1) as f64 * mu {
                self.region_integral(m, b, 0)
            } else {
                0.0
            };
            total.push(full);
            total.push(-above);
        }
        let bm = big_m as f64;
        total.push(self.ws.erlang_tail(big_m, bm * mu));
        total.push(-self.ws.erlang_tail(big_m, bm * nu));
        Ok(total.value().clamp(0.0, 1.0))
    }

    /// `P[E_H >= x]`, summed directly from the pieces still above `x` so
    /// that tail probabilities keep their relative precision.
    pub fn sf(&self, x: f64) -> Result<f64> {
        Self::check_energy(x)?;
        let big_m = self.antennas;
        let bm = big_m as f64;
        let nu = x / self.c;
        if nu.is_infinite() {
            return Ok(0.0);
        }
        let mu = self.mu;
        if nu < mu {
            // 1 - (1 - e^{-ν})^M without cancellation
            let ln_cdf = bm * (-(-nu).exp()).ln_1p();
            return Ok(-ln_cdf.exp_m1());
        }
        let mut total = TermSum::new();
        for m in 1..big_m {
            let b = m as f64 * nu;
            if b < (m + 1) as f64 * mu {
                total.push(self.region_integral(m, b, 0));
            }
        }
        total.push(self.ws.erlang_tail(big_m, bm * nu));
        Ok(total.value().clamp(0.0, 1.0))
    }

    /// Density of `E_H` in 1/J. At region boundaries the right-hand piece is
    /// used.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        Self::check_energy(x)?;
        let big_m = self.antennas;
        let bm = big_m as f64;
        let nu = x / self.c;
        if nu.is_infinite() {
            return Ok(0.0);
        }
        let erlang = bm * self.ws.erlang_pdf(big_m, bm * nu) / self.c;
        if self.mu == 0.0 {
            return Ok(erlang);
        }
        let mu = self.mu;
        if nu < mu {
            let q = -(-nu).exp_m1();
            return Ok(bm * (-nu).exp() * q.powi(big_m as i32 - 1) / self.c);
        }
        let mut total = TermSum::new();
        total.push(erlang);
        for m in 1..big_m {
            let b = m as f64 * nu;
            if b < (m + 1) as f64 * mu {
                total.push(m as f64 * self.boundary_density(m, b) / self.c);
            }
        }
        Ok(total.value())
    }

    /// `P[E_H < x, M_a = m]`; summing over `m` gives [`HarvestLaw::cdf`].
    pub fn branch_cdf(&self, m: usize, x: f64) -> Result<f64> {
        Self::check_energy(x)?;
        let big_m = self.antennas;
        self.check_count(m)?;
        let nu = x / self.c;
        let mu = self.mu;
        let bm = big_m as f64;
        if m == big_m {
            if big_m == 1 {
                return Ok(-(-nu).exp_m1());
            }
            if nu < mu {
                return Ok(0.0);
            }
            return Ok(self.ws.erlang_cdf(big_m, bm * nu) - self.ws.erlang_cdf(big_m, bm * mu));
        }
        let fallback = if m == 1 { (-(-nu.min(mu)).exp_m1()).powi(big_m as i32) } else { 0.0 };
        if nu < mu {
            return Ok(fallback);
        }
        let b = m as f64 * nu;
        let above = if b < (m + 1) as f64 * mu { self.region_integral(m, b, 0) } else { 0.0 };
        Ok(fallback + self.region_integral(m, m as f64 * mu, 0) - above)
    }

    /// Density of `x` jointly with `M_a = m`, in 1/J.
    pub fn branch_pdf(&self, m: usize, x: f64) -> Result<f64> {
        Self::check_energy(x)?;
        let big_m = self.antennas;
        self.check_count(m)?;
        let nu = x / self.c;
        let mu = self.mu;
        let bm = big_m as f64;
        if m == big_m {
            if big_m == 1 {
                return Ok((-nu).exp() / self.c);
            }
            if nu < mu {
                return Ok(0.0);
            }
            return Ok(bm * self.ws.erlang_pdf(big_m, bm * nu) / self.c);
        }
        if nu < mu {
            if m > 1 {
                return Ok(0.0);
            }
            let q = -(-nu).exp_m1();
            return Ok(bm * (-nu).exp() * q.powi(big_m as i32 - 1) / self.c);
        }
        let b = m as f64 * nu;
        if b >= (m + 1) as f64 * mu {
            return Ok(0.0);
        }
        Ok(m as f64 * self.boundary_density(m, b) / self.c)
    }

    fn check_count(&self, m: usize) -> Result<()> {
        if m == 0 || m > self.antennas {
            return Err(out_of_range("active beam count", m, format!("1..={}", self.antennas)));
        }
        Ok(())
    }

    /// `E[E_H]` in joules.
    pub fn mean(&self) -> f64 {
        let big_m = self.antennas;
        let bm = big_m as f64;
        if self.mu == 0.0 {
            return self.c;
        }
        let mu = self.mu;
        let ws = self.ws;
        let mut total = TermSum::new();
        // E[z_1; z_1 < μ]
        for s in 0..big_m {
            let k = (s + 1) as f64;
            let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
            total.push(sign * bm * ws.binomial(big_m - 1, s) / (k * k) * ws.erlang_cdf(2, k * mu));
        }
        for m in 1..big_m {
            total.push(self.region_integral(m, m as f64 * mu, 1) / m as f64);
        }
        // E[z_M; z_M >= Mμ] / M = P[Gamma(M+1) >= Mμ]
        total.push(ws.erlang_tail(big_m + 1, bm * mu));
        self.c * total.value()
    }

    /// `P[M_a = m]` for `m = 1..=M`.
    pub fn pmf(&self) -> Vec<f64> {
        let big_m = self.antennas;
        if big_m == 1 {
            return vec![1.0];
        }
        let mut pmf = vec![0.0; big_m];
        if self.mu == 0.0 {
            pmf[big_m - 1] = 1.0;
            return pmf;
        }
        pmf[0] = self.single_beam_probability();
        for (m, p) in pmf.iter_mut().enumerate().take(big_m - 1).skip(1) {
            *p = self.region_integral(m + 1, (m + 1) as f64 * self.mu, 0);
        }
        pmf[big_m - 1] = self.ws.erlang_tail(big_m, big_m as f64 * self.mu);
        pmf
    }

    /// `P[M_a = 1]` from its dedicated closed form: the fallback mass
    /// `(1 - e^{-μ})^M` plus the probability that the best beam meets the
    /// threshold while two beams would not.
    pub fn single_beam_probability(&self) -> f64 {
        let big_m = self.antennas;
        let mu = self.mu;
        let fallback = (-(-mu).exp_m1()).powi(big_m as i32);
        if big_m == 1 {
            return 1.0;
        }
        let ws = self.ws;
        let mut sum = TermSum::new();
        sum.push(fallback);
        let e1 = (-mu).exp();
        let e2 = (-2.0 * mu).exp();
        for i in 1..big_m - 1 {
            let fi = i as f64;
            let coeff = (ws.ln_factorial(big_m) - ws.ln_factorial(big_m - 2 - i) - ws.ln_factorial(i)).exp();
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let first = e1 * (-(-(fi + 1.0) * mu).exp_m1()) / (fi + 1.0);
            let second = e2 * (-(-fi * mu).exp_m1()) / fi;
            sum.push(sign * coeff * first);
            sum.push(-sign * coeff * second);
        }
        let lead = ws.falling(big_m, 2);
        sum.push(lead * e1 * (-(-mu).exp_m1()));
        sum.push(-lead * mu * e2);
        sum.value()
    }

    /// `P[M_a = 1]` assembled from the general middle-region series at
    /// `m = 1`; agrees with [`HarvestLaw::single_beam_probability`].
    pub fn single_beam_probability_via_region(&self) -> f64 {
        if self.antennas == 1 {
            return 1.0;
        }
        (-(-self.mu).exp_m1()).powi(self.antennas as i32) + self.region_integral(1, self.mu, 0)
    }

    /// `∫_0^{L-b} da ∫_b^{L-a} dw w^e f_m(a, w)` with `L = (m+1)μ` and
    /// `f_m` the joint density of `(α_{m+1:M}, z_m)`, for `b` in `[mμ, L]`.
    ///
    /// At `b = mμ`, `e = 0` this is `P[M_a = m, threshold met]`; for larger `b`
    /// it is the part of that event with `z_m >= b`.
    pub(crate) fn region_integral(&self, m: usize, b: f64, extra_power: usize) -> f64 {
        let ws = self.ws;
        let big_m = self.antennas;
        let mu = self.mu;
        let l = (m + 1) as f64 * mu;
        let d = l - b;
        if d <= 0.0 {
            return 0.0;
        }
        let exp_b = (-b).exp();
        let exp_l = (-l).exp();
        let fm = m as f64;
        let mut sum = TermSum::new();
        for i in 0..big_m - m {
            let ci = ws.joint_coefficient(big_m, m, i);
            let beta_lo = (i + 1) as f64;
            let beta_hi = i as f64;
            for j in 0..m {
                let n = m - 1 - j;
                let cj = ci * ws.binomial(m - 1, j) * (-fm).powi(n as i32);
                let near = ws.exp_moment(beta_lo, n, d);
                let p = j + extra_power;
                for t in 0..=p {
                    let q = p - t;
                    let ct = cj * ws.falling(p, t);
                    sum.push(ct * b.powi(q as i32) * exp_b * near);
                    for s in 0..=q {
                        let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
                        let far = ws.exp_moment(beta_hi, n + s, d);
                        sum.push(-ct * exp_l * sign * ws.binomial(q, s) * l.powi((q - s) as i32) * far);
                    }
                }
            }
        }
        sum.value()
    }

    /// `∫_0^{L-b} f_m(a, b) da`, minus the `b`-derivative of the region
    /// integral.
    pub(crate) fn boundary_density(&self, m: usize, b: f64) -> f64 {
        let ws = self.ws;
        let big_m = self.antennas;
        let l = (m + 1) as f64 * self.mu;
        let d = l - b;
        if d <= 0.0 {
            return 0.0;
        }
        let fm = m as f64;
        let mut sum = TermSum::new();
        for i in 0..big_m - m {
            let ci = ws.joint_coefficient(big_m, m, i);
            for j in 0..m {
                let n = m - 1 - j;
                sum.push(
                    ci * ws.binomial(m - 1, j)
                        * (-fm).powi(n as i32)
                        * b.powi(j as i32)
                        * ws.exp_moment((i + 1) as f64, n, d),
                );
            }
        }
        (-b).exp() * sum.value()
    }
}

/// `P[E_H < x]` with the shared workspace.
pub fn cdf_harvested(params: &SystemParams, x: f64) -> Result<f64> {
    HarvestLaw::new(params)?.cdf(x)
}

/// Density of `E_H` with the shared workspace.
pub fn pdf_harvested(params: &SystemParams, x: f64) -> Result<f64> {
    HarvestLaw::new(params)?.pdf(x)
}

/// Mean harvested energy per coherence interval in joules.
pub fn mean_harvested(params: &SystemParams) -> Result<f64> {
    Ok(HarvestLaw::new(params)?.mean())
}

/// Probability mass of the active beam count over `m = 1..=M`.
pub fn pmf_active_beams(params: &SystemParams) -> Result<Vec<f64>> {
    Ok(HarvestLaw::new(params)?.pmf())
}
