use std::fmt;

use crate::model::ModelParams;

/// Exponent ε used when reporting the intensity-growth condition T^{5/2+ε}/μ.
pub const REFERENCE_EPSILON: f64 = 1.0;
/// Exponent p used when reporting the binning conditions.
pub const REFERENCE_P: f64 = 1.0;

/// Finite-sample values of the three asymptotic rate conditions.
///
/// Each ratio should be small; any ratio above one is flagged. The report is
/// advisory and never rejects a configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    pub horizon: f64,
    pub mu: f64,
    pub bins: usize,
    /// T^{5/2+ε} / μ
    pub intensity_ratio: f64,
    /// T^{p+1/2} / k^{p/2}
    pub coarse_bin_ratio: f64,
    /// k T^{1/2} / μ
    pub sparse_bin_ratio: f64,
}

impl RegimeReport {
    pub fn ratios(&self) -> [(&'static str, f64); 3] {
        [
            ("T^(5/2+eps)/mu", self.intensity_ratio),
            ("T^(p+1/2)/k^(p/2)", self.coarse_bin_ratio),
            ("k*T^(1/2)/mu", self.sparse_bin_ratio),
        ]
    }

    pub fn passes(&self) -> bool {
        self.ratios().iter().all(|(_, r)| *r <= 1.0)
    }

    pub fn warnings(&self) -> Vec<String> {
        self.ratios().iter().filter(|(_, r)| *r > 1.0).map(|(name, r)| format!("{name} = {r:.4} exceeds 1")).collect()
    }

    /// Bin counts keeping both binning ratios at or below one, if any exist.
    pub fn feasible_bins(&self) -> Option<(usize, usize)> {
        let p = REFERENCE_P;
        // T^{p+1/2} / k^{p/2} <= 1  <=>  k >= T^{(2p+1)/p}
        let lo = (self.horizon.powf((2.0 * p + 1.0) / p) * (1.0 - 1e-12)).ceil().max(1.0);
        let hi = (self.mu / self.horizon.sqrt()).floor();
        (lo <= hi).then_some((lo as usize, hi as usize))
    }

    /// Geometric midpoint of the feasible bin range.
    pub fn suggested_bins(&self) -> Option<usize> {
        self.feasible_bins().map(|(lo, hi)| ((lo as f64 * hi as f64).sqrt().round() as usize).clamp(lo, hi))
    }
}

impl fmt::Display for RegimeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "horizon={} mu={} bins={}", self.horizon, self.mu, self.bins)?;
        for (name, r) in self.ratios() {
            let flag = if r > 1.0 { "WARN" } else { "ok" };
            writeln!(f, "{name:<20} {r:>12.6}  {flag}")?;
        }
        match self.feasible_bins() {
            Some((lo, hi)) => writeln!(f, "feasible bins        [{lo}, {hi}]")?,
            None => writeln!(f, "feasible bins        none")?,
        }
        write!(f, "regime               {}", if self.passes() { "pass" } else { "warn" })
    }
}

pub fn check_regime(params: &ModelParams) -> RegimeReport {
    let t = params.horizon;
    let k = params.bins as f64;
    let p = REFERENCE_P;
    RegimeReport {
        horizon: t,
        mu: params.mu,
        bins: params.bins,
        intensity_ratio: t.powf(2.5 + REFERENCE_EPSILON) / params.mu,
        coarse_bin_ratio: t.powf(p + 0.5) / k.powf(p / 2.0),
        sparse_bin_ratio: k * t.sqrt() / params.mu,
    }
}
