//! Exponent fits, log-periodic oscillation statistics, ensemble averages and
//! the local limit comparison for trap walks.

mod clt;
mod ensemble;
mod fit;
mod oscillation;

pub use clt::{local_clt_error, CltOptions, LocalClt};
pub use ensemble::{
    annealed_kernel, annealed_mean, band_of, quantile_band, quantile_sorted, sample_ensemble,
    AnnealedKernel, Ensemble, QuantileBand, BAND_LEVELS,
};
pub use fit::{fit_exponent, fit_power_law, ExponentFit, TimeWindow};
pub use oscillation::{oscillation_profile, OscillationStats, PEAK_FACTOR};
