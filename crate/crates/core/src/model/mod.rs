//! The latent efficient price, its fractional part and the Cox order flow.
//!
//! The efficient price is `P_t = P_0 + σ W_t` with `P_0 = p0 + U`, `U` uniform on
//! [0, 1). Limit orders at the best bid `B_t = ⌊P_t⌋` arrive with stochastic
//! intensity `μ h(Y_t)` where `Y_t = P_t − B_t`. Tick size is one.

mod binned;
pub mod io;
mod response;
mod simulate;

pub use binned::{simulate_binned, BinnedPath};
pub use response::{ResponseFunction, ResponseKind};
pub use simulate::{
    ergodic_average, path_value, simulate, simulate_events, SimulationRecord, SkeletonPoint, ThinningSampler,
};

use crate::error::{Error, Result};

/// Full model parameterization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Volatility of the efficient price, ticks per unit time^½.
    pub sigma: f64,
    /// Base intensity μ_T, events per unit time.
    pub mu: f64,
    /// Observation horizon T.
    pub horizon: f64,
    /// Number of estimation bins k_T.
    pub bins: usize,
    /// Integer price floor of P_0, in ticks.
    pub p0: u64,
    pub seed: u64,
}

impl ModelParams {
    /// Numerical illustration profile: σ = 1, T = 5, μ = 1000, k = 150.
    pub const ILLUSTRATION: ModelParams =
        ModelParams { sigma: 1.0, mu: 1000.0, horizon: 5.0, bins: 150, p0: 100, seed: 0 };

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("{name} must be finite and positive, got {v}")))
            }
        };
        positive("sigma", self.sigma)?;
        positive("mu", self.mu)?;
        positive("horizon", self.horizon)?;
        if self.bins == 0 {
            return Err(Error::InvalidParams("bins must be at least 1".into()));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Length T/k_T of one estimation bin.
    pub fn bin_width(&self) -> f64 {
        self.horizon / self.bins as f64
    }
}

/// `x − ⌊x⌋`, kept inside [0, 1) even when rounding would produce 1.
pub fn fractional_part(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("fractional part of non-finite value {x}")));
    }
    Ok(frac(x))
}

#[inline]
pub(crate) fn frac(x: f64) -> f64 {
    let y = x - x.floor();
    if y < 1.0 {
        y
    } else {
        ONE_MINUS
    }
}

/// Largest double below one.
pub(crate) const ONE_MINUS: f64 = 1.0 - f64::EPSILON / 2.0;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractional_part_examples() {
        assert!((fractional_part(2.3).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(fractional_part(-0.25).unwrap(), 0.75);
        assert_eq!(fractional_part(5.0).unwrap(), 0.0);
        assert!(fractional_part(f64::NAN).is_err());
        assert!(fractional_part(f64::INFINITY).is_err());
        let tiny = fractional_part(-1e-18).unwrap();
        assert!(tiny < 1.0 && tiny > 0.999);
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::ILLUSTRATION.validate().is_ok());
        let bad = ModelParams { sigma: 0.0, ..ModelParams::ILLUSTRATION };
        assert!(bad.validate().is_err());
        let bad = ModelParams { bins: 0, ..ModelParams::ILLUSTRATION };
        assert!(bad.validate().is_err());
        let bad = ModelParams { horizon: f64::NAN, ..ModelParams::ILLUSTRATION };
        assert!(bad.validate().is_err());
    }
}
