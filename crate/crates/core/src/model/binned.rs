use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use super::{frac, ModelParams, ResponseFunction};
use crate::error::{Error, Result};
use crate::rng::{self, Domain};

/// Bin counts of the order flow together with the latent fractional price at
/// every bin boundary.
///
/// Conditional on the price path the counts in disjoint bins are independent
/// Poisson variables with means `μ ∫_bin h(Y_s) ds`, so drawing them from an
/// integrated intensity reproduces the law of every bin-level statistic without
/// placing individual events. The integral is a trapezoid sum over `substeps`
/// exact Brownian increments per bin, with steps that wrap through an integer
/// split at the crossing; cost does not grow with μ.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedPath {
    pub horizon: f64,
    pub counts: Vec<u64>,
    /// μ ∫ h(Y) over each bin, the conditional Poisson mean.
    pub intensity: Vec<f64>,
    /// Y at time 0.
    pub y_start: f64,
    /// Y at the right end `jT/k` of each bin.
    pub y_end: Vec<f64>,
}

impl BinnedPath {
    pub fn total_count(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }
}

pub fn simulate_binned(
    params: &ModelParams,
    h: &ResponseFunction,
    substeps: usize,
    replicate: u64,
) -> Result<BinnedPath> {
    params.validate()?;
    if substeps == 0 {
        return Err(Error::InvalidParams("substeps must be at least 1".into()));
    }
    let mut rng = rng::stream(params.seed, Domain::Binned, replicate);
    let k = params.bins;
    let dt = params.bin_width() / substeps as f64;
    let sd = params.sigma * dt.sqrt();
    let y_start: f64 = rng.random();
    let mut y = y_start;
    let mut hy = h.eval(y);
    let (bottom, top) = (h.eval(0.0), h.left_limit_at_one());
    let mut counts = Vec::with_capacity(k);
    let mut intensity = Vec::with_capacity(k);
    let mut y_end = Vec::with_capacity(k);
    for _ in 0..k {
        let mut integral = 0.0;
        for _ in 0..substeps {
            let dz: f64 = sd * Distribution::<f64>::sample(&StandardNormal, &mut rng);
            let raw = y + dz;
            let next_y = frac(raw);
            let next = h.eval(next_y);
            if (0.0..1.0).contains(&raw) {
                integral += 0.5 * dt * (hy + next);
            } else {
                // Y wraps through an integer; split the step at the crossing.
                let (edge, other) = if raw >= 1.0 { (1.0, 0.0) } else { (0.0, 1.0) };
                let r = ((edge - y) / dz).clamp(0.0, 1.0);
                let before = if edge == 1.0 { top } else { bottom };
                let after = if other == 0.0 { bottom } else { top };
                integral += 0.5 * dt * (r * (hy + before) + (1.0 - r) * (after + next));
            }
            y = next_y;
            hy = next;
        }
        let lambda = params.mu * integral;
        let n = if lambda > 0.0 {
            Poisson::new(lambda)
                .map_err(|e| Error::InvalidParams(format!("Poisson mean {lambda}: {e}")))?
                .sample(&mut rng) as u64
        } else {
            0
        };
        counts.push(n);
        intensity.push(lambda);
        y_end.push(y);
    }
    Ok(BinnedPath { horizon: params.horizon, counts, intensity, y_start, y_end })
}
