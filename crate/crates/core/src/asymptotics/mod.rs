//! Regeneration-cycle oracle for the limit variances and replicate studies of
//! the limit laws.

mod clt;
mod cycle;
mod statistics;
mod variance;

pub use clt::{
    clt_verify_h, clt_verify_hinv, clt_verify_mu, corollary_check, rate_check, replicate_samples, CltReport, Profile,
    RateReport, Statistic, MAX_SUBSTEP_VARIANCE, MIN_INTENSITY_REPS, MIN_REPS,
};
pub use cycle::{bridge_crossing_probability, sample_cycle, CycleSample, CycleSampler};
pub use statistics::{
    cycle_statistics, cycle_statistics_with_exit_times, default_t_grid, exit_times, hitting_moments, laplace_check,
    laplace_closed_form, laplace_report, parse_statistics, read_statistics, render_statistics, write_statistics,
    CycleStatistics, Estimate, HittingMoments, LaplaceRow, DEFAULT_CYCLES, DEFAULT_GRID_POINTS, DEFAULT_STEP,
    LINEAR_VAR_ZH, MIN_CYCLES,
};
pub use variance::{intensity_variance, RhoSurface};
