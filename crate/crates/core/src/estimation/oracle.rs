//! Oracle statistics that normalize by the true base intensity μ instead of μ̂.
//!
//! Only available in simulation, where μ is known. They relate to the
//! estimators through `θ_j = (μ̂/μ) θ̂_j` and `ĥ⁻¹(t) = ĥ_e⁻¹(t μ̂/μ)`.

use crate::error::{Error, Result};

/// θ_j = k · count_j / (μ T).
pub fn theta(counts: &[u64], mu: f64, horizon: f64) -> Result<Vec<f64>> {
    if !(mu > 0.0 && horizon > 0.0) {
        return Err(Error::InvalidParams("mu and horizon must be positive".into()));
    }
    let k = counts.len() as f64;
    Ok(counts.iter().map(|&c| k * c as f64 / (mu * horizon)).collect())
}

/// ĥ_e⁻¹(t) = (1/k) #{j : θ_j ≤ t}.
pub fn h_inverse(theta: &[f64], t: f64) -> f64 {
    super::estimate_h_inverse(theta, t)
}

/// ĥ_e(u) = θ_(⌊uk⌋+1).
pub fn h(theta: &[f64], u: f64) -> Result<f64> {
    super::estimate_h(theta, u)
}
