//! Physical system parameters and the flat `key=value` configuration format.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Physical constants of one base station / sensor deployment.
///
/// The energy harvested per unit projection power when the whole transmit
/// power sits on one beam is `c = η·T_c·P_T / (Γ·d_H^λ)`; every energy in this
/// crate is `c` times a dimensionless function of the exponential projection
/// powers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Base station antennas `M`, equal to the number of random beams.
    pub antennas: usize,
    /// Single-antenna data users `K`, at least `M`.
    pub users: usize,
    /// Total transmit power `P_T` in watts.
    pub tx_power: f64,
    /// Coherence time `T_c` in seconds.
    pub coherence_time: f64,
    /// Energy harvesting efficiency `η` in (0, 1].
    pub efficiency: f64,
    /// Path loss exponent `λ` in [2, 5].
    pub pathloss_exponent: f64,
    /// Log-distance constant `Γ = PL(d_0)/d_0^λ`.
    pub pathloss_const: f64,
    /// Base station to sensor distance `d_H` in meters.
    pub distance: f64,
    /// Per-coherence-time energy requirement `E_th` in joules.
    pub energy_threshold: f64,
}

/// Field names accepted by [`SystemParams::from_config_str`], in file order.
pub const CONFIG_KEYS: [&str; 9] = [
    "antennas",
    "users",
    "tx_power",
    "coherence_time",
    "efficiency",
    "pathloss_exponent",
    "pathloss_const",
    "distance",
    "energy_threshold",
];

impl Default for SystemParams {
    /// 10 kW base station, sensor at 100 m, λ = 3, 100 ms coherence time,
    /// η = Γ = 1, E_th = 6 mJ, four antennas and four users.
    fn default() -> Self {
        SystemParams {
            antennas: 4,
            users: 4,
            tx_power: 1.0e4,
            coherence_time: 0.1,
            efficiency: 1.0,
            pathloss_exponent: 3.0,
            pathloss_const: 1.0,
            distance: 100.0,
            energy_threshold: 0.006,
        }
    }
}

impl SystemParams {
    pub fn with_antennas(mut self, antennas: usize) -> Self {
        self.antennas = antennas;
        self.users = self.users.max(antennas);
        self
    }

    pub fn with_users(mut self, users: usize) -> Self {
        self.users = users;
        self
    }

    pub fn with_energy_threshold(mut self, energy_threshold: f64) -> Self {
        self.energy_threshold = energy_threshold;
        self
    }

    /// Sets `E_th` so that the dimensionless threshold equals `mu`.
    pub fn with_mu(self, mu: f64) -> Self {
        let c = self.energy_constant_unchecked();
        self.with_energy_threshold(mu * c)
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and > 0, got {v}"),
                })
            }
        }
        if self.antennas == 0 {
            return Err(Error::InvalidParameter {
                name: "antennas",
                reason: "must be at least 1".into(),
            });
        }
        if self.users < self.antennas {
            return Err(Error::InvalidParameter {
                name: "users",
                reason: format!(
                    "must be >= antennas ({}), got {}",
                    self.antennas, self.users
                ),
            });
        }
        positive("tx_power", self.tx_power)?;
        positive("coherence_time", self.coherence_time)?;
        positive("efficiency", self.efficiency)?;
        if self.efficiency > 1.0 {
            return Err(Error::InvalidParameter {
                name: "efficiency",
                reason: format!("must be <= 1, got {}", self.efficiency),
            });
        }
        if !(2.0..=5.0).contains(&self.pathloss_exponent) {
            return Err(Error::InvalidParameter {
                name: "pathloss_exponent",
                reason: format!("must lie in [2, 5], got {}", self.pathloss_exponent),
            });
        }
        positive("pathloss_const", self.pathloss_const)?;
        positive("distance", self.distance)?;
        if !(self.energy_threshold.is_finite() && self.energy_threshold >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "energy_threshold",
                reason: format!("must be finite and >= 0, got {}", self.energy_threshold),
            });
        }
        let c = self.energy_constant_unchecked();
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter {
                name: "energy_constant",
                reason: format!("η·T_c·P_T/(Γ·d_H^λ) must be finite and > 0, got {c}"),
            });
        }
        let mu = self.energy_threshold / c;
        if !mu.is_finite() {
            return Err(Error::InvalidParameter {
                name: "energy_threshold",
                reason: "threshold over energy constant is not finite".into(),
            });
        }
        Ok(())
    }

    fn energy_constant_unchecked(&self) -> f64 {
        self.efficiency * self.coherence_time * self.tx_power
            / (self.pathloss_const * self.distance.powf(self.pathloss_exponent))
    }

    /// Joules harvested per unit projection power at full transmit power.
    pub fn energy_constant(&self) -> Result<f64> {
        self.validate()?;
        Ok(self.energy_constant_unchecked())
    }

    /// Dimensionless threshold `μ = E_th·Γ·d_H^λ / (η·T_c·P_T)`.
    pub fn mu(&self) -> Result<f64> {
        self.validate()?;
        Ok(self.energy_threshold / self.energy_constant_unchecked())
    }

    /// Parses the flat `key=value` format. Blank lines and `#` comments are
    /// ignored; keys not given keep their [`Default`] values; unknown or
    /// repeated keys are errors.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut params = SystemParams::default();
        let mut seen = [false; CONFIG_KEYS.len()];
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: line_no,
                reason: format!("expected key=value, got `{line}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let slot = CONFIG_KEYS
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| Error::Config {
                    line: line_no,
                    reason: format!("unknown key `{key}`"),
                })?;
            if std::mem::replace(&mut seen[slot], true) {
                return Err(Error::Config {
                    line: line_no,
                    reason: format!("duplicate key `{key}`"),
                });
            }
            params
                .set_field(key, value)
                .map_err(|reason| Error::Config {
                    line: line_no,
                    reason,
                })?;
        }
        params.validate()?;
        Ok(params)
    }

    pub fn from_config_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_config_str(&text)
    }

    fn set_field(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
            value
                .parse::<T>()
                .map_err(|_| format!("`{key}`: cannot parse `{value}`"))
        }
        match key {
            "antennas" => self.antennas = num(key, value)?,
            "users" => self.users = num(key, value)?,
            "tx_power" => self.tx_power = num(key, value)?,
            "coherence_time" => self.coherence_time = num(key, value)?,
            "efficiency" => self.efficiency = num(key, value)?,
            "pathloss_exponent" => self.pathloss_exponent = num(key, value)?,
            "pathloss_const" => self.pathloss_const = num(key, value)?,
            "distance" => self.distance = num(key, value)?,
            "energy_threshold" => self.energy_threshold = num(key, value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }
}

impl fmt::Display for SystemParams {
    /// Writes the configuration format; the output parses back to `self`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "antennas={}", self.antennas)?;
        writeln!(f, "users={}", self.users)?;
        writeln!(f, "tx_power={:e}", self.tx_power)?;
        writeln!(f, "coherence_time={:e}", self.coherence_time)?;
        writeln!(f, "efficiency={:e}", self.efficiency)?;
        writeln!(f, "pathloss_exponent={:e}", self.pathloss_exponent)?;
        writeln!(f, "pathloss_const={:e}", self.pathloss_const)?;
        writeln!(f, "distance={:e}", self.distance)?;
        writeln!(f, "energy_threshold={:e}", self.energy_threshold)
    }
}

/// Dimensionless threshold `μ` for validated parameters.
pub fn mu_parameter(params: &SystemParams) -> Result<f64> {
    params.mu()
}
