mod args;
mod commands;
mod output;
mod validate;

use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use args::{Common, SweepSpec};
use commands::{parse_overlay, Curve};

/// Harvested-energy statistics and sum-rate of a random-beamforming
/// downlink that powers a sensor by cooperative beam selection.
///
/// Exit status: 0 on success, 1 when `validate` finds a failing check,
/// 2 on bad input or I/O errors.
#[derive(Parser, Debug)]
#[command(name = "beamharvest", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct CurveArgs {
    /// Grid points on [0, x_max]
    #[arg(long, default_value_t = 301)]
    points: usize,
    /// Grid end in joules (default 3 E_th, or 4c when E_th = 0)
    #[arg(long)]
    x_max: Option<f64>,
    /// Append Monte Carlo columns from N trials (`N` or `trials=N`)
    #[arg(long, value_name = "TRIALS", value_parser = parse_overlay)]
    mc_overlay: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Density of the harvested energy: `x,value,region`
    Pdf(CurveArgs),
    /// Distribution function of the harvested energy: `x,value,region`
    Cdf(CurveArgs),
    /// Average harvested energy, closed form and Monte Carlo, over a sweep
    MeanSweep {
        /// `NAME=v1,v2,...` or `NAME=start:stop:count[:log]`; NAME is
        /// energy_threshold, antennas or users (default: E_th/c log-spaced
        /// over [0.1, 50], 30 points)
        #[arg(long)]
        sweep: Option<SweepSpec>,
    },
    /// Active-beam PMF, closed form and Monte Carlo, with a TVD footer
    Pmf,
    /// Average sum-rate over a sweep, one column pair per user count
    SumrateSweep {
        /// energy_threshold or snr sweep (default: E_th/c in
        /// {0, 0.5, 1, 2, 3, 4, 6, 8, 12, 20, 50})
        #[arg(long)]
        sweep: Option<SweepSpec>,
        /// Comma-separated user counts (default: the configured K)
        #[arg(long, value_delimiter = ',', value_parser = positive)]
        users_list: Vec<usize>,
    },
    /// Joint trials: histogram.csv, pmf.csv and rates.csv in --out, or all
    /// three on stdout
    Simulate {
        #[arg(long, default_value_t = 200)]
        bins: usize,
        /// Histogram upper edge in joules (default 2 E_th, or 3c)
        #[arg(long)]
        histogram_max: Option<f64>,
    },
    /// Invariant suite; writes `check,status,value,threshold`
    Validate {
        #[arg(long, value_enum, default_value_t = validate::Level::Quick)]
        level: validate::Level,
    },
}

fn positive(s: &str) -> Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(0) | Err(_) => Err(format!("expected a positive integer, got `{s}`")),
        Ok(v) => Ok(v),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(n) = cli.common.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let cfg = cli.common.resolve()?;
    let out = cli.common.out.as_deref();
    match cli.command {
        Command::Pdf(a) => commands::curve(&cfg, Curve::Pdf, a.points, a.x_max, a.mc_overlay, out)?,
        Command::Cdf(a) => commands::curve(&cfg, Curve::Cdf, a.points, a.x_max, a.mc_overlay, out)?,
        Command::MeanSweep { sweep } => commands::mean_sweep(&cfg, sweep.as_ref(), out)?,
        Command::Pmf => commands::pmf(&cfg, out)?,
        Command::SumrateSweep { sweep, users_list } => {
            commands::sumrate_sweep(&cfg, sweep.as_ref(), &users_list, out)?
        }
        Command::Simulate { bins, histogram_max } => commands::simulate(&cfg, bins, histogram_max, out)?,
        Command::Validate { level } => {
            if validate::run(&cfg, level, out)? > 0 {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(2),
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
