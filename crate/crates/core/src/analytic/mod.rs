//! Closed-form statistics: order-statistic densities, the harvested-energy
//! CDF/PDF and mean, and the active-beam PMF.

mod curve;
mod harvest;
mod order_stats;
mod series;

pub use curve::{format_sig17, AnalyticCurve, CurveKind};
pub use harvest::{
    cdf_harvested, mean_harvested, pdf_harvested, pmf_active_beams, HarvestLaw, Region,
};
pub use order_stats::{joint_pdf_next_and_sum, pdf_z1, pdf_zm};
pub use series::{CompensatedSum, SeriesWorkspace, TermSum, DEFAULT_MAX_ANTENNAS};
