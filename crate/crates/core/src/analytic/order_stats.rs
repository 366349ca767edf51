//! Densities of the ordered unit-exponential projection powers.
//!
//! With `α_{1:M} >= … >= α_{M:M}` the descending order statistics of `M`
//! i.i.d. unit exponentials and `z_m` the sum of the `m` largest:
//!
//! * `z_1` has density `M e^{-x} (1 - e^{-x})^{M-1}`;
//! * `z_m` has a finite series density with kernel `(m/j)^{m-1}` and the
//!   truncated-exponential correction `e^{-jx/m} - Σ_{t<m-1} (-jx/m)^t/t!`;
//! * `(α_{m+1:M}, z_m)` has the joint density
//!   `Σ_i (-1)^i M! (y - m x)^{m-1} e^{-y-(i+1)x} / ((M-m-1-i)! m! (m-1)! i!)`
//!   on `y >= m x`.

use super::series::{SeriesWorkspace, TermSum};
use crate::error::{out_of_range, Result};

fn check_x(x: f64) -> Result<()> {
    if x >= 0.0 && !x.is_nan() {
        Ok(())
    } else {
        Err(out_of_range("abscissa", x, ">= 0"))
    }
}

impl SeriesWorkspace {
    /// Density of the largest of `antennas` unit exponentials.
    pub fn pdf_z1(&self, antennas: usize, x: f64) -> Result<f64> {
        self.check_antennas(antennas)?;
        check_x(x)?;
        let q = -(-x).exp_m1();
        Ok(antennas as f64 * (-x).exp() * q.powi(antennas as i32 - 1))
    }

    /// Density of the sum of the `m` largest of `antennas` unit exponentials.
    pub fn pdf_zm(&self, antennas: usize, m: usize, x: f64) -> Result<f64> {
        self.check_antennas(antennas)?;
        if m == 0 || m > antennas {
            return Err(out_of_range("partial sum order", m, format!("1..={antennas}")));
        }
        check_x(x)?;
        let big_m = antennas;
        let lead = (self.ln_factorial(big_m) - self.ln_factorial(big_m - m) - self.ln_factorial(m)).exp();
        let mut bracket = TermSum::new();
        bracket.push(self.power_over_factorial(x, m - 1));
        let kernel_order = (m - 1) as i32;
        for j in 1..=(big_m - m) {
            let sign = if (m + j - 1).is_multiple_of(2) { 1.0 } else { -1.0 };
            let coeff = self.binomial(big_m - m, j) * (m as f64 / j as f64).powi(kernel_order);
            let y = j as f64 * x / m as f64;
            bracket.push(sign * coeff * self.exp_taylor_remainder(m - 1, y));
        }
        Ok(lead * (-x).exp() * bracket.value())
    }

    /// Joint density of `(α_{m+1:M}, z_m)` at `(x, y)`; zero off `y >= m x`.
    pub fn joint_pdf_next_and_sum(&self, antennas: usize, m: usize, x: f64, y: f64) -> Result<f64> {
        self.check_antennas(antennas)?;
        if m == 0 || m >= antennas {
            return Err(out_of_range(
                "partial sum order",
                m,
                format!("1..={} (needs an (m+1)-th statistic)", antennas - 1),
            ));
        }
        check_x(x)?;
        if y.is_nan() {
            return Err(out_of_range("partial sum", y, "a number"));
        }
        let gap = y - m as f64 * x;
        if gap < 0.0 {
            return Ok(0.0);
        }
        let kernel = gap.powi(m as i32 - 1) * (-y - x).exp();
        let mut sum = TermSum::new();
        for i in 0..antennas - m {
            sum.push(self.joint_coefficient(antennas, m, i) * (-(i as f64) * x).exp());
        }
        Ok(kernel * sum.value())
    }

    /// `(-1)^i M! / ((M-m-1-i)! m! (m-1)! i!)`.
    pub(crate) fn joint_coefficient(&self, antennas: usize, m: usize, i: usize) -> f64 {
        let mag = (self.ln_factorial(antennas)
            - self.ln_factorial(antennas - m - 1 - i)
            - self.ln_factorial(m)
            - self.ln_factorial(m - 1)
            - self.ln_factorial(i))
        .exp();
        if i.is_multiple_of(2) {
            mag
        } else {
            -mag
        }
    }
}

/// Density of `z_1` using the shared workspace.
pub fn pdf_z1(antennas: usize, x: f64) -> Result<f64> {
    SeriesWorkspace::shared().pdf_z1(antennas, x)
}

/// Density of `z_m` using the shared workspace.
pub fn pdf_zm(antennas: usize, m: usize, x: f64) -> Result<f64> {
    SeriesWorkspace::shared().pdf_zm(antennas, m, x)
}

/// Joint density of `(α_{m+1:M}, z_m)` using the shared workspace.
pub fn joint_pdf_next_and_sum(antennas: usize, m: usize, x: f64, y: f64) -> Result<f64> {
    SeriesWorkspace::shared().joint_pdf_next_and_sum(antennas, m, x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn z1_single_antenna_is_exponential() {
        for &x in &[0.0, 0.3, 2.0, 9.0] {
            assert_relative_eq!(pdf_z1(1, x).unwrap(), (-x).exp(), max_relative = 1e-15);
        }
        assert_eq!(pdf_z1(1, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn z1_two_antennas_at_ln2() {
        assert_relative_eq!(pdf_z1(2, 2f64.ln()).unwrap(), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn zm_full_sum_is_gamma() {
        for big_m in 1..=10 {
            for &x in &[0.01f64, 0.5, 3.0, 12.0] {
                let ws = SeriesWorkspace::shared();
                let gamma = x.powi(big_m as i32 - 1) * (-x).exp() / ws.factorial(big_m - 1);
                assert_relative_eq!(pdf_zm(big_m, big_m, x).unwrap(), gamma, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn zm_first_order_matches_z1() {
        for big_m in 1..=10 {
            for &x in &[0.05, 0.7, 2.5, 10.0] {
                let a = pdf_zm(big_m, 1, x).unwrap();
                let b = pdf_z1(big_m, x).unwrap();
                assert!((a - b).abs() < 1e-12, "M={big_m} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn zm_top_two_of_three() {
        // 3 e^{-x} (x - 2 + 2 e^{-x/2}) by direct convolution
        for &x in &[0.1f64, 1.0, 4.0] {
            let expect = 3.0 * (-x).exp() * (x - 2.0 + 2.0 * (-x / 2.0).exp());
            assert_relative_eq!(pdf_zm(3, 2, x).unwrap(), expect, max_relative = 1e-10);
        }
    }

    #[test]
    fn joint_support_and_errors() {
        assert_eq!(joint_pdf_next_and_sum(4, 2, 1.0, 1.5).unwrap(), 0.0);
        assert!(joint_pdf_next_and_sum(4, 4, 0.1, 1.0).is_err());
        assert!(joint_pdf_next_and_sum(4, 0, 0.1, 1.0).is_err());
        assert!(pdf_zm(4, 5, 1.0).is_err());
        assert!(pdf_z1(4, -1.0).is_err());
        assert!(pdf_z1(11, 1.0).is_err());
    }

    #[test]
    fn joint_two_antennas_is_min_max_density() {
        // (min, max) of two exponentials: 2 e^{-x} e^{-y} on y >= x
        for &(x, y) in &[(0.1f64, 0.4f64), (1.0, 3.0), (0.5, 0.5)] {
            let expect = 2.0 * (-x - y).exp();
            assert_relative_eq!(joint_pdf_next_and_sum(2, 1, x, y).unwrap(), expect, max_relative = 1e-14);
        }
    }
}
