//! Cooperative beam selection for an RF-powered sensor served by a random
//! unitary beamforming base station.
//!
//! * [`params`] and [`selection`]: system constants and the per-interval
//!   beam-selection rule.
//! * [`channel`]: Rayleigh channel draws and Haar-random beam sets.
//! * [`analytic`]: closed-form harvested-energy CDF, PDF and mean, the
//!   active-beam PMF, and the order-statistic densities behind them.
//! * [`montecarlo`]: the sampling oracle and the sum-rate estimator.

pub mod analytic;
pub mod channel;
pub mod error;
pub mod montecarlo;
pub mod params;
pub mod quadrature;
pub mod rng;
pub mod selection;

pub use analytic::{AnalyticCurve, CurveKind, HarvestLaw, Region, SeriesWorkspace};
pub use channel::{draw_realization, ordered_projections, ChannelRealization};
pub use error::{Error, Result};
pub use montecarlo::{RateEstimate, TrialStats};
pub use params::{mu_parameter, SystemParams};
pub use selection::{harvested_energy_per_beam, select_beams, SelectionOutcome};
