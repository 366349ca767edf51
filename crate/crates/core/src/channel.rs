//! Rayleigh block-fading channel draws and random orthonormal beams.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::rng::StreamRng;

/// One coherence interval: sensor channel, beam set and projection powers.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Sensor channel `h_e`, i.i.d. CN(0, 1) entries.
    pub sensor_channel: Vec<Complex64>,
    /// `M × M` unitary matrix whose rows are the beams `w_1..w_M`.
    pub beams: DMatrix<Complex64>,
    /// `α_m = |⟨h_e, w_m⟩|²`.
    pub projections: Vec<f64>,
    /// `K × M` user channels, present only for sum-rate runs.
    pub user_channels: Option<DMatrix<Complex64>>,
}

/// Circularly-symmetric complex Gaussian with unit variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-distributed `n × n` unitary matrix.
///
/// QR of an i.i.d. complex Gaussian matrix, with each column of `Q` rotated
/// by the phase of the matching diagonal entry of `R` so the result does not
/// inherit the factorization's phase convention.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(n, n, |_, _| complex_gaussian(rng));
    let (mut q, r) = g.qr().unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let norm = d.norm();
        let phase = if norm > 0.0 { d / norm } else { Complex64::new(1.0, 0.0) };
        for v in q.column_mut(j).iter_mut() {
            *v *= phase;
        }
    }
    q
}

/// `|⟨h, w⟩|²` with `⟨h, w⟩ = Σ_k h_k·conj(w_k)`.
pub fn projection_power<'a>(
    channel: impl IntoIterator<Item = &'a Complex64>,
    beam: impl IntoIterator<Item = &'a Complex64>,
) -> f64 {
    channel
        .into_iter()
        .zip(beam)
        .map(|(h, w)| h * w.conj())
        .sum::<Complex64>()
        .norm_sqr()
}

/// Projection powers of every row of `channels` onto every beam in `beams`,
/// as a row-major `rows × beams.nrows()` buffer.
pub(crate) fn projection_matrix(channels: &DMatrix<Complex64>, beams: &DMatrix<Complex64>) -> Vec<f64> {
    // rows·beams^H gives inner products for all pairs at once
    let inner = channels * beams.adjoint();
    let (r, c) = inner.shape();
    let mut out = Vec::with_capacity(r * c);
    for i in 0..r {
        for j in 0..c {
            out.push(inner[(i, j)].norm_sqr());
        }
    }
    out
}

/// Draws a realization from an existing stream.
pub fn draw_realization_with<R: Rng + ?Sized>(
    params: &SystemParams,
    rng: &mut R,
    with_users: bool,
) -> ChannelRealization {
    let m = params.antennas;
    let sensor_channel: Vec<Complex64> = (0..m).map(|_| complex_gaussian(rng)).collect();
    let unitary = haar_unitary(m, rng);
    let beams = unitary.transpose();
    let projections = (0..m)
        .map(|j| projection_power(sensor_channel.iter(), beams.row(j).iter()))
        .collect();
    let user_channels =
        with_users.then(|| DMatrix::from_fn(params.users, m, |_, _| complex_gaussian(rng)));
    ChannelRealization {
        sensor_channel,
        beams,
        projections,
        user_channels,
    }
}

/// Draws the realization identified by `seed`; equal seeds give bitwise
/// equal realizations.
pub fn draw_realization(
    params: &SystemParams,
    seed: u64,
    with_users: bool,
) -> Result<ChannelRealization> {
    params.validate()?;
    let mut rng = StreamRng::seed_from_u64(seed);
    Ok(draw_realization_with(params, &mut rng, with_users))
}

/// Projections sorted in descending order together with their partial sums
/// `z_m`.
pub fn ordered_projections(real: &ChannelRealization) -> (Vec<f64>, Vec<f64>) {
    sorted_partial_sums(&real.projections)
}

pub fn sorted_partial_sums(projections: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut sorted = projections.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let sums = sorted
        .iter()
        .scan(0.0, |acc, a| {
            *acc += a;
            Some(*acc)
        })
        .collect();
    (sorted, sums)
}

impl ChannelRealization {
    /// Largest entrywise deviation of `W·Wᴴ` from the identity.
    pub fn orthonormality_residual(&self) -> f64 {
        let gram = &self.beams * self.beams.adjoint();
        let n = gram.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    /// Relative gap between `Σ α_m` and `‖h_e‖²`.
    pub fn completeness_residual(&self) -> f64 {
        let energy: f64 = self.sensor_channel.iter().map(|h| h.norm_sqr()).sum();
        let total: f64 = self.projections.iter().sum();
        (total - energy).abs() / energy.max(f64::MIN_POSITIVE)
    }

    /// Writes `kind,row,col,re,im` rows: `sensor`, `beam`, `user` entries and
    /// the real `projection` values.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["kind", "row", "col", "re", "im"])?;
        let mut put = |kind: &str, row: usize, col: usize, z: Complex64| {
            w.write_record([
                kind.to_string(),
                row.to_string(),
                col.to_string(),
                format!("{:.16e}", z.re),
                format!("{:.16e}", z.im),
            ])
        };
        for (i, h) in self.sensor_channel.iter().enumerate() {
            put("sensor", i, 0, *h)?;
        }
        for i in 0..self.beams.nrows() {
            for j in 0..self.beams.ncols() {
                put("beam", i, j, self.beams[(i, j)])?;
            }
        }
        if let Some(users) = &self.user_channels {
            for i in 0..users.nrows() {
                for j in 0..users.ncols() {
                    put("user", i, j, users[(i, j)])?;
                }
            }
        }
        for (i, a) in self.projections.iter().enumerate() {
            put("projection", i, 0, Complex64::new(*a, 0.0))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format produced by [`ChannelRealization::write_csv`].
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut sensor = Vec::new();
        let mut beams = Vec::new();
        let mut users = Vec::new();
        let mut projections = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let field = |i: usize| rec.get(i).ok_or_else(|| Error::Csv(format!("short row {rec:?}")));
            let idx = |i: usize| -> Result<usize> {
                field(i)?.parse().map_err(|_| Error::Csv(format!("bad index in {rec:?}")))
            };
            let num = |i: usize| -> Result<f64> {
                field(i)?.parse().map_err(|_| Error::Csv(format!("bad number in {rec:?}")))
            };
            let entry = (idx(1)?, idx(2)?, Complex64::new(num(3)?, num(4)?));
            match field(0)? {
                "sensor" => sensor.push(entry),
                "beam" => beams.push(entry),
                "user" => users.push(entry),
                "projection" => projections.push(entry),
                other => return Err(Error::Csv(format!("unknown kind `{other}`"))),
            }
        }
        let m = sensor.len();
        if beams.len() != m * m || projections.len() != m {
            return Err(Error::Csv("inconsistent realization dimensions".into()));
        }
        let mut w = DMatrix::zeros(m, m);
        for (i, j, z) in beams {
            *w.get_mut((i, j)).ok_or_else(|| Error::Csv("beam index".into()))? = z;
        }
        let user_channels = if users.is_empty() {
            None
        } else {
            let k = users.len() / m.max(1);
            let mut u = DMatrix::zeros(k, m);
            for (i, j, z) in users {
                *u.get_mut((i, j)).ok_or_else(|| Error::Csv("user index".into()))? = z;
            }
            Some(u)
        };
        Ok(ChannelRealization {
            sensor_channel: sensor.into_iter().map(|e| e.2).collect(),
            beams: w,
            projections: projections.into_iter().map(|e| e.2.re).collect(),
            user_channels,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_antenna_beam_is_unit_modulus() {
        let p = SystemParams::default().with_antennas(1);
        for seed in 0..20 {
            let r = draw_realization(&p, seed, false).unwrap();
            assert!((r.beams[(0, 0)].norm() - 1.0).abs() < 1e-12);
            let h2 = r.sensor_channel[0].norm_sqr();
            assert!((r.projections[0] - h2).abs() < 1e-12 * h2.max(1.0));
        }
    }

    #[test]
    fn same_seed_same_realization() {
        let p = SystemParams::default().with_antennas(6).with_users(9);
        let a = draw_realization(&p, 42, true).unwrap();
        let b = draw_realization(&p, 42, true).unwrap();
        assert_eq!(a, b);
        let c = draw_realization(&p, 43, true).unwrap();
        assert_ne!(a.projections, c.projections);
        assert_eq!(a.user_channels.as_ref().unwrap().shape(), (9, 6));
    }

    #[test]
    fn beams_orthonormal_and_complete() {
        for m in 1..=10 {
            let p = SystemParams::default().with_antennas(m);
            for seed in 0..50 {
                let r = draw_realization(&p, seed, false).unwrap();
                assert!(r.orthonormality_residual() < 1e-10);
                assert!(r.completeness_residual() < 1e-9);
            }
        }
    }

    #[test]
    fn ordering_and_partial_sums() {
        let (s, z) = sorted_partial_sums(&[0.2, 3.0, 1.0, 0.5]);
        assert_eq!(s, vec![3.0, 1.0, 0.5, 0.2]);
        let expect = [3.0, 4.0, 4.5, 4.7];
        for (a, b) in z.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        let (_, z) = sorted_partial_sums(&[0.75; 5]);
        for (m, v) in z.iter().enumerate() {
            assert_eq!(*v, 0.75 * (m + 1) as f64);
        }
    }

    #[test]
    fn csv_dump_round_trips() {
        let p = SystemParams::default().with_antennas(3).with_users(4);
        let r = draw_realization(&p, 5, true).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let back = ChannelRealization::read_csv(buf.as_slice()).unwrap();
        assert_eq!(r, back);
    }
}
