//! Replicate studies of the limit laws.
//!
//! Replicates use [`simulate_binned`], which draws bin counts from the
//! integrated intensity; every statistic below depends on the flow only
//! through bin counts, so the law of the replicate sample is exact up to the
//! trapezoid error of the intensity integral.

use rayon::prelude::*;

use super::statistics::Estimate;
use super::variance::check_not_flat;
use crate::error::{Error, Result};
use crate::estimation::{check_regime, EstimationResult};
use crate::model::{simulate_binned, BinnedPath, ModelParams, ResponseFunction};
use crate::stats::{jarque_bera, JarqueBera, Moments};

pub const MIN_REPS: usize = 500;
pub const MIN_INTENSITY_REPS: usize = 1_000;

/// Parameters for one replicate study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profile {
    pub params: ModelParams,
    /// Brownian substeps per bin for the intensity integral.
    pub substeps: usize,
}

/// Largest `σ² dt` used for the intensity integral by [`Profile::auto`].
pub const MAX_SUBSTEP_VARIANCE: f64 = 1e-3;

impl Profile {
    pub fn new(params: ModelParams, substeps: usize) -> Self {
        Self { params, substeps }
    }

    /// Enough substeps per bin to keep `σ² dt ≤ 1e-3`.
    pub fn auto(params: ModelParams) -> Self {
        let var = params.sigma * params.sigma * params.bin_width();
        let substeps = (var / MAX_SUBSTEP_VARIANCE).ceil().max(1.0) as usize;
        Self { params, substeps }
    }

    /// The profile at `factor` times the horizon with every regime ratio kept:
    /// bins scale as `factor³` and the intensity as `factor^3.5`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut p = self.params;
        p.horizon *= factor;
        p.bins = (p.bins as f64 * factor.powi(3)).round().max(1.0) as usize;
        p.mu *= factor.powf(3.5);
        Self::auto(p)
    }
}

/// The centred, `√T`-scaled quantity studied in each replicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Statistic {
    /// `√T(μ̂/μ − 1)`.
    Intensity,
    /// `√T(ĥ⁻¹(t) − h⁻¹(t))`.
    Inverse { t: f64 },
    /// `√T(ĥ(u) − h(u))`.
    Response { u: f64 },
    /// `√T(Ŷ_t − Y_t)` at the right end `t = jT/k` of bin `j` (1-based).
    Price { bin: usize },
}

impl Statistic {
    fn evaluate(&self, p: &ModelParams, h: &ResponseFunction, path: &BinnedPath) -> Result<f64> {
        let root = p.horizon.sqrt();
        if let Statistic::Price { bin } = *self {
            // ĥ⁻¹(θ̂_j) is the share of bins whose count does not exceed bin j's.
            let c = path.counts[bin - 1];
            if path.total_count() == 0 {
                return Err(Error::CannotNormalize);
            }
            let rank = path.counts.iter().filter(|&&n| n <= c).count();
            let y_hat = rank as f64 / p.bins as f64;
            return Ok(root * (y_hat - path.y_end[bin - 1]));
        }
        let est = EstimationResult::from_counts(&path.counts, p.horizon)?;
        Ok(match *self {
            Statistic::Intensity => root * (est.mu_hat / p.mu - 1.0),
            Statistic::Inverse { t } => root * (est.h_inv_hat(t) - h.inverse(t)),
            Statistic::Response { u } => root * (est.h_hat(u)? - h.eval(u)),
            Statistic::Price { .. } => unreachable!("handled above"),
        })
    }

    fn check(&self, p: &ModelParams, h: &ResponseFunction) -> Result<()> {
        match *self {
            Statistic::Intensity => Ok(()),
            Statistic::Inverse { t } => {
                let top = h.left_limit_at_one();
                if !(t > 0.0 && t < top) {
                    return Err(Error::Domain(format!("t = {t} outside (0, {top})")));
                }
                Ok(())
            }
            Statistic::Response { u } => {
                if !(u > 0.0 && u < 1.0) {
                    return Err(Error::Domain(format!("u = {u} outside (0, 1)")));
                }
                check_not_flat(h, u)
            }
            Statistic::Price { bin } => {
                if bin == 0 || bin > p.bins {
                    return Err(Error::Domain(format!("bin {bin} outside 1..={}", p.bins)));
                }
                Ok(())
            }
        }
    }
}

/// One replicate per stream `0..n_reps` of `profile.params.seed`.
pub fn replicate_samples(
    profile: &Profile,
    h: &ResponseFunction,
    statistic: Statistic,
    n_reps: usize,
) -> Result<Vec<f64>> {
    let p = &profile.params;
    p.validate()?;
    statistic.check(p, h)?;
    (0..n_reps as u64)
        .into_par_iter()
        .map(|r| {
            let path = simulate_binned(p, h, profile.substeps, r)?;
            statistic.evaluate(p, h, &path)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CltReport {
    pub params: ModelParams,
    pub n_reps: usize,
    pub mean: Estimate,
    pub variance: Estimate,
    pub rmse: f64,
    pub target_variance: f64,
    /// `variance / target − 1`.
    pub relative_error: f64,
    pub normality: JarqueBera,
}

impl CltReport {
    pub fn from_samples(params: ModelParams, xs: &[f64], target_variance: f64) -> Self {
        let m = Moments::of(xs);
        let rmse = (xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64).sqrt();
        CltReport {
            params,
            n_reps: xs.len(),
            mean: Estimate { value: m.mean, se: m.std_error() },
            variance: Estimate { value: m.variance, se: m.variance_std_error(xs) },
            rmse,
            target_variance,
            relative_error: m.variance / target_variance - 1.0,
            normality: jarque_bera(xs),
        }
    }

    /// `z` of the mean against 0.
    pub fn mean_z(&self) -> f64 {
        self.mean.z_score(0.0)
    }

    /// `z` of the variance against the target.
    pub fn variance_z(&self) -> f64 {
        self.variance.z_score(self.target_variance)
    }
}

fn study(
    profiles: &[Profile],
    h: &ResponseFunction,
    statistic: Statistic,
    n_reps: usize,
    min_reps: usize,
    target_variance: f64,
) -> Result<Vec<CltReport>> {
    if n_reps < min_reps {
        return Err(Error::Precondition(format!("at least {min_reps} replicates are required, got {n_reps}")));
    }
    profiles
        .iter()
        .map(|profile| {
            let regime = check_regime(&profile.params);
            if !regime.passes() {
                return Err(Error::Precondition(format!(
                    "profile outside the asymptotic regime: {}",
                    regime.warnings().join("; ")
                )));
            }
            let xs = replicate_samples(profile, h, statistic, n_reps)?;
            Ok(CltReport::from_samples(profile.params, &xs, target_variance))
        })
        .collect()
}

/// `√T(μ̂/μ − 1)` against `σ² Var[Z^h]`.
pub fn clt_verify_mu(
    profiles: &[Profile],
    h: &ResponseFunction,
    n_reps: usize,
    target_variance: f64,
) -> Result<Vec<CltReport>> {
    study(profiles, h, Statistic::Intensity, n_reps, MIN_INTENSITY_REPS, target_variance)
}

pub fn clt_verify_hinv(
    profiles: &[Profile],
    h: &ResponseFunction,
    t: f64,
    n_reps: usize,
    target_variance: f64,
) -> Result<Vec<CltReport>> {
    study(profiles, h, Statistic::Inverse { t }, n_reps, MIN_REPS, target_variance)
}

pub fn clt_verify_h(
    profiles: &[Profile],
    h: &ResponseFunction,
    u: f64,
    n_reps: usize,
    target_variance: f64,
) -> Result<Vec<CltReport>> {
    study(profiles, h, Statistic::Response { u }, n_reps, MIN_REPS, target_variance)
}

/// `√T(Ŷ_t − Y_t)` at the bin boundary closest to the middle of the horizon.
pub fn corollary_check(
    profiles: &[Profile],
    h: &ResponseFunction,
    n_reps: usize,
    target_variance: f64,
) -> Result<Vec<CltReport>> {
    profiles
        .iter()
        .map(|profile| {
            let bin = (profile.params.bins / 2).max(1);
            study(std::slice::from_ref(profile), h, Statistic::Price { bin }, n_reps, MIN_REPS, target_variance)
                .map(|mut r| r.remove(0))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub short: CltReport,
    pub long: CltReport,
    /// RMSE of the unscaled error at the short horizon over that at the long one.
    pub rmse_ratio: f64,
    pub horizon_ratio: f64,
}

/// Compares the RMSE of `ĥ⁻¹(t)` at two horizons; under a `√T` rate the ratio
/// is `√(T_long/T_short)`.
pub fn rate_check(short: &Profile, long: &Profile, h: &ResponseFunction, t: f64, n_reps: usize) -> Result<RateReport> {
    let run = |p: &Profile| -> Result<CltReport> {
        Ok(clt_verify_hinv(std::slice::from_ref(p), h, t, n_reps, f64::NAN)?.remove(0))
    };
    let a = run(short)?;
    let b = run(long)?;
    let unscaled = |r: &CltReport| r.rmse / r.params.horizon.sqrt();
    Ok(RateReport {
        rmse_ratio: unscaled(&a) / unscaled(&b),
        horizon_ratio: long.params.horizon / short.params.horizon,
        short: a,
        long: b,
    })
}
