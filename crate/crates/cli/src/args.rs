use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use beamharvest_core::SystemParams;
use clap::Args;

/// Flags shared by every subcommand. Flags override the config file, which
/// overrides the built-in defaults.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// `key=value` file with system constants and optional `snr`, `trials`,
    /// `seed` run keys
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Base-station antennas M (users are raised to M unless set)
    #[arg(long, global = true)]
    pub antennas: Option<usize>,
    /// Users K (>= M)
    #[arg(long, global = true)]
    pub users: Option<usize>,
    /// Sensor energy threshold E_th in joules
    #[arg(long, global = true, value_name = "JOULES")]
    pub energy_threshold: Option<f64>,
    /// Monte Carlo trials (each subcommand has its own default)
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Master seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Downlink transmit SNR ρ, linear (noise power 1)
    #[arg(long, global = true)]
    pub snr: Option<f64>,
    /// Output file (directory for `simulate`); stdout when omitted
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Worker threads for Monte Carlo runs (results do not depend on it)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

pub const DEFAULT_SNR: f64 = 10.0;
pub const DEFAULT_SEED: u64 = 1;

/// Resolved settings of one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: SystemParams,
    pub snr: f64,
    pub trials: Option<u64>,
    pub seed: u64,
}

impl RunConfig {
    pub fn trials_or(&self, default: u64) -> u64 {
        self.trials.unwrap_or(default)
    }
}

const RUN_KEYS: [&str; 3] = ["snr", "trials", "seed"];

/// `(line, key, value)` of a run key found in a config file.
type RunKey = (usize, String, String);

/// Splits run keys out of a config text, leaving blank lines in their place
/// so parse errors keep their line numbers.
fn split_run_keys(text: &str) -> Result<(String, Vec<RunKey>)> {
    let mut physics = String::with_capacity(text.len());
    let mut run = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        match line.split_once('=') {
            Some((k, v)) if RUN_KEYS.contains(&k.trim()) => {
                if run.iter().any(|(_, key, _): &RunKey| key == k.trim()) {
                    bail!("config line {}: duplicate key `{}`", idx + 1, k.trim());
                }
                run.push((idx + 1, k.trim().to_string(), v.trim().to_string()));
                physics.push('\n');
            }
            _ => {
                physics.push_str(raw);
                physics.push('\n');
            }
        }
    }
    Ok((physics, run))
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| anyhow::anyhow!("config line {line}: `{key}`: cannot parse `{value}`"))
}

impl Common {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut snr = None;
        let mut trials = None;
        let mut seed = None;
        let mut params = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                let (physics, run) = split_run_keys(&text)?;
                for (line, key, value) in run {
                    match key.as_str() {
                        "snr" => snr = Some(parse_value(line, &key, &value)?),
                        "trials" => trials = Some(parse_value(line, &key, &value)?),
                        _ => seed = Some(parse_value(line, &key, &value)?),
                    }
                }
                SystemParams::from_config_str(&physics)
                    .with_context(|| format!("config {}", path.display()))?
            }
            None => SystemParams::default(),
        };
        if let Some(m) = self.antennas {
            params = params.with_antennas(m);
        }
        if let Some(k) = self.users {
            params = params.with_users(k);
        }
        if let Some(e) = self.energy_threshold {
            params = params.with_energy_threshold(e);
        }
        params.validate()?;
        let snr = self.snr.or(snr).unwrap_or(DEFAULT_SNR);
        if !(snr.is_finite() && snr >= 0.0) {
            bail!("snr must be finite and >= 0, got {snr}");
        }
        let trials = self.trials.or(trials);
        if trials == Some(0) {
            bail!("trials must be >= 1");
        }
        Ok(RunConfig {
            params,
            snr,
            trials,
            seed: self.seed.or(seed).unwrap_or(DEFAULT_SEED),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweptParameter {
    EnergyThreshold,
    Antennas,
    Users,
    Snr,
}

impl SweptParameter {
    pub fn column(&self) -> &'static str {
        match self {
            SweptParameter::EnergyThreshold => "E_th",
            SweptParameter::Antennas => "M",
            SweptParameter::Users => "K",
            SweptParameter::Snr => "snr",
        }
    }

    fn is_integer(&self) -> bool {
        matches!(self, SweptParameter::Antennas | SweptParameter::Users)
    }
}

impl FromStr for SweptParameter {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "energy_threshold" | "E_th" => Ok(SweptParameter::EnergyThreshold),
            "antennas" | "M" => Ok(SweptParameter::Antennas),
            "users" | "K" => Ok(SweptParameter::Users),
            "snr" => Ok(SweptParameter::Snr),
            other => Err(format!(
                "unknown sweep parameter `{other}` (energy_threshold, antennas, users, snr)"
            )),
        }
    }
}

/// A swept parameter and its grid, written `NAME=v1,v2,...` or
/// `NAME=start:stop:count[:log]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweptParameter,
    pub values: Vec<f64>,
}

impl SweepSpec {
    pub fn require(&self, allowed: &[SweptParameter]) -> Result<()> {
        if !allowed.contains(&self.parameter) {
            bail!(
                "this command cannot sweep `{}`; allowed: {}",
                self.parameter.column(),
                allowed.iter().map(|p| p.column()).collect::<Vec<_>>().join(", ")
            );
        }
        Ok(())
    }

    /// Copy of `params` with the swept parameter set to `value`.
    pub fn apply(&self, params: &SystemParams, value: f64) -> SystemParams {
        match self.parameter {
            SweptParameter::EnergyThreshold => (*params).with_energy_threshold(value),
            SweptParameter::Antennas => (*params).with_antennas(value as usize),
            SweptParameter::Users => (*params).with_users(value as usize),
            SweptParameter::Snr => *params,
        }
    }
}

impl FromStr for SweepSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (name, grid) = s
            .split_once('=')
            .ok_or_else(|| format!("expected NAME=GRID, got `{s}`"))?;
        let parameter: SweptParameter = name.trim().parse()?;
        let num = |t: &str| -> std::result::Result<f64, String> {
            t.trim().parse::<f64>().map_err(|_| format!("cannot parse `{t}` in `{s}`"))
        };
        let values = if grid.contains(':') {
            let parts: Vec<&str> = grid.split(':').collect();
            let log = match parts.get(3).map(|t| t.trim()) {
                None | Some("lin") => false,
                Some("log") => true,
                Some(other) => return Err(format!("grid spacing must be `lin` or `log`, got `{other}`")),
            };
            if parts.len() < 3 || parts.len() > 4 {
                return Err(format!("range must be start:stop:count[:log], got `{grid}`"));
            }
            let (start, stop) = (num(parts[0])?, num(parts[1])?);
            let count: usize = parts[2]
                .trim()
                .parse()
                .map_err(|_| format!("bad count `{}`", parts[2]))?;
            if count < 2 {
                return Err(format!("range count must be >= 2, got {count}"));
            }
            if log && !(start > 0.0 && stop > 0.0) {
                return Err("log grid needs positive endpoints".into());
            }
            (0..count)
                .map(|i| {
                    let t = i as f64 / (count - 1) as f64;
                    if i == count - 1 {
                        stop
                    } else if log {
                        start * (stop / start).powf(t)
                    } else {
                        start + (stop - start) * t
                    }
                })
                .collect()
        } else {
            grid.split(',').map(num).collect::<std::result::Result<Vec<_>, _>>()?
        };
        if values.is_empty() {
            return Err("empty grid".into());
        }
        for &v in &values {
            if !v.is_finite() || v < 0.0 {
                return Err(format!("grid values must be finite and >= 0, got {v}"));
            }
            if parameter.is_integer() && (v < 1.0 || v.fract() != 0.0) {
                return Err(format!("`{}` values must be positive integers, got {v}", parameter.column()));
            }
        }
        Ok(SweepSpec { parameter, values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_list_and_ranges() {
        let s: SweepSpec = "energy_threshold=0.001,0.002".parse().unwrap();
        assert_eq!(s.parameter, SweptParameter::EnergyThreshold);
        assert_eq!(s.values, vec![0.001, 0.002]);
        let s: SweepSpec = "snr=0:10:3".parse().unwrap();
        assert_eq!(s.values, vec![0.0, 5.0, 10.0]);
        let s: SweepSpec = "E_th=1e-4:1e-2:3:log".parse().unwrap();
        assert!((s.values[1] - 1e-3).abs() < 1e-15);
        assert_eq!(s.values[2], 1e-2);
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        for bad in [
            "energy_threshold=1:2:1",
            "energy_threshold=0:1:4:log",
            "antennas=2.5",
            "antennas=0,2",
            "power=1,2",
            "snr=-1",
            "snr",
            "snr=1:2:3:cubic",
        ] {
            assert!(bad.parse::<SweepSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn run_keys_leave_line_numbers_alone() {
        let (physics, run) = split_run_keys("antennas=3\nsnr=2 # comment\nbogus=1\n").unwrap();
        assert_eq!(physics, "antennas=3\n\nbogus=1\n");
        assert_eq!(run, vec![(2, "snr".to_string(), "2".to_string())]);
        let err = SystemParams::from_config_str(&physics).unwrap_err().to_string();
        assert!(err.contains('3'), "{err}");
    }

    #[test]
    fn flags_override_config() {
        let dir = std::env::temp_dir().join(format!("beamharvest-args-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.conf");
        std::fs::write(&path, "antennas=6\nusers=8\nsnr=3\nseed=9\n").unwrap();
        let common = Common {
            config: Some(path),
            antennas: None,
            users: Some(12),
            energy_threshold: None,
            trials: None,
            seed: None,
            snr: Some(5.0),
            out: None,
            threads: None,
        };
        let cfg = common.resolve().unwrap();
        assert_eq!(cfg.params.antennas, 6);
        assert_eq!(cfg.params.users, 12);
        assert_eq!(cfg.snr, 5.0);
        assert_eq!(cfg.seed, 9);
        std::fs::remove_dir_all(dir).unwrap();
    }
}
