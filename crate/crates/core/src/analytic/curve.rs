//! Tabulated closed-form curves and their `x,value,region` CSV form.

use std::io::{Read, Write};

use super::harvest::{HarvestLaw, Region};
use super::series::SeriesWorkspace;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    PdfEh,
    CdfEh,
    PdfZ1,
    PdfZm,
    JointPdf,
    PmfMa,
}

/// A closed-form function evaluated on an ascending grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticCurve {
    pub kind: CurveKind,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Energy curves only; `None` elsewhere.
    pub regions: Vec<Option<Region>>,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: "abscissae must be finite and >= 0".into(),
        });
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: "abscissae must be strictly ascending".into(),
        });
    }
    Ok(())
}

impl AnalyticCurve {
    pub fn harvested_pdf(law: &HarvestLaw<'_>, grid: &[f64]) -> Result<Self> {
        check_grid(grid)?;
        let values = grid.iter().map(|&x| law.pdf(x)).collect::<Result<_>>()?;
        Ok(Self::energy(CurveKind::PdfEh, law, grid, values))
    }

    pub fn harvested_cdf(law: &HarvestLaw<'_>, grid: &[f64]) -> Result<Self> {
        check_grid(grid)?;
        let values = grid.iter().map(|&x| law.cdf(x)).collect::<Result<_>>()?;
        Ok(Self::energy(CurveKind::CdfEh, law, grid, values))
    }

    fn energy(kind: CurveKind, law: &HarvestLaw<'_>, grid: &[f64], values: Vec<f64>) -> Self {
        AnalyticCurve {
            kind,
            grid: grid.to_vec(),
            values,
            regions: grid.iter().map(|&x| Some(law.region(x))).collect(),
        }
    }

    pub fn partial_sum_pdf(ws: &SeriesWorkspace, antennas: usize, m: usize, grid: &[f64]) -> Result<Self> {
        check_grid(grid)?;
        let values = grid
            .iter()
            .map(|&x| if m == 1 { ws.pdf_z1(antennas, x) } else { ws.pdf_zm(antennas, m, x) })
            .collect::<Result<_>>()?;
        Ok(AnalyticCurve {
            kind: if m == 1 { CurveKind::PdfZ1 } else { CurveKind::PdfZm },
            grid: grid.to_vec(),
            values,
            regions: vec![None; grid.len()],
        })
    }

    /// Joint density of `(α_{m+1:M}, z_m)` along `x` at fixed `y`.
    pub fn joint_pdf_slice(ws: &SeriesWorkspace, antennas: usize, m: usize, y: f64, grid: &[f64]) -> Result<Self> {
        check_grid(grid)?;
        let values = grid
            .iter()
            .map(|&x| ws.joint_pdf_next_and_sum(antennas, m, x, y))
            .collect::<Result<_>>()?;
        Ok(AnalyticCurve {
            kind: CurveKind::JointPdf,
            grid: grid.to_vec(),
            values,
            regions: vec![None; grid.len()],
        })
    }

    pub fn active_beam_pmf(law: &HarvestLaw<'_>) -> Self {
        let values = law.pmf();
        AnalyticCurve {
            kind: CurveKind::PmfMa,
            grid: (1..=values.len()).map(|m| m as f64).collect(),
            regions: vec![None; values.len()],
            values,
        }
    }

    /// Writes `x,value,region` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "value", "region"])?;
        for ((x, v), r) in self.grid.iter().zip(&self.values).zip(&self.regions) {
            w.write_record([
                format_sig17(*x),
                format_sig17(*v),
                r.map(|r| r.label()).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Parses rows written by [`AnalyticCurve::write_csv`].
    pub fn read_csv<R: Read>(kind: CurveKind, input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["x", "value", "region"] {
            return Err(Error::Csv(format!("unexpected header {headers:?}")));
        }
        let mut curve = AnalyticCurve {
            kind,
            grid: Vec::new(),
            values: Vec::new(),
            regions: Vec::new(),
        };
        for rec in rdr.records() {
            let rec = rec?;
            let num = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::Csv(format!("bad row {rec:?}")))
            };
            curve.grid.push(num(0)?);
            curve.values.push(num(1)?);
            let label = rec.get(2).unwrap_or("");
            let region = if label.is_empty() {
                None
            } else {
                Some(Region::parse(label).ok_or_else(|| Error::Csv(format!("bad region `{label}`")))?)
            };
            curve.regions.push(region);
        }
        Ok(curve)
    }
}

/// Scientific notation with 17 significant digits; parses back to the same
/// `f64`.
pub fn format_sig17(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SystemParams;

    #[test]
    fn csv_round_trip_is_exact() {
        let law = HarvestLaw::new(&SystemParams::default()).unwrap();
        let eth = law.energy_threshold();
        let grid: Vec<f64> = (0..40).map(|i| i as f64 * 0.075 * eth).collect();
        let curve = AnalyticCurve::harvested_cdf(&law, &grid).unwrap();
        let mut buf = Vec::new();
        curve.write_csv(&mut buf).unwrap();
        let back = AnalyticCurve::read_csv(CurveKind::CdfEh, buf.as_slice()).unwrap();
        assert_eq!(curve, back);
        assert_eq!(back.values[0], 0.0);
    }

    #[test]
    fn pmf_curve_has_unlabelled_rows() {
        let law = HarvestLaw::new(&SystemParams::default().with_antennas(3)).unwrap();
        let curve = AnalyticCurve::active_beam_pmf(&law);
        let mut buf = Vec::new();
        curve.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,value,region\n1.0000000000000000e0,"));
        assert!(text.lines().nth(1).unwrap().ends_with(','));
    }

    #[test]
    fn rejects_unsorted_grid() {
        let law = HarvestLaw::new(&SystemParams::default()).unwrap();
        assert!(AnalyticCurve::harvested_pdf(&law, &[0.0, 2.0, 1.0]).is_err());
        assert!(AnalyticCurve::harvested_pdf(&law, &[-1.0]).is_err());
    }
}
