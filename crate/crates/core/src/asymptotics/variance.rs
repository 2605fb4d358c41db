//! Limit variances assembled from a `ρ` grid by trapezoid quadrature.
//!
//! The grid is closed at `t = h(1⁻)` with `ρ = 0` there: `Z_e(h(1⁻))` vanishes
//! identically because `h⁻¹(h(1⁻)) = 1`.

use super::statistics::CycleStatistics;
use crate::error::{Error, Result};
use crate::model::ResponseFunction;
use crate::quadrature::{interpolate, trapezoid};

const COROLLARY_POINTS: usize = 2000;

#[derive(Debug, Clone)]
pub struct RhoSurface {
    sigma: f64,
    top: f64,
    grid: Vec<f64>,
    rho: Vec<f64>,
    /// ∫₀^{h(1⁻)} ρ(t_i, v) dv for every grid point.
    row_integrals: Vec<f64>,
    total: f64,
}

impl RhoSurface {
    pub fn new(stats: &CycleStatistics, h: &ResponseFunction) -> Result<Self> {
        let top = h.left_limit_at_one();
        let m = stats.grid_len();
        if m < 2 {
            return Err(Error::Precondition("rho grid needs at least two points".into()));
        }
        if stats.t_grid[0] != 0.0 {
            return Err(Error::Precondition("rho grid must start at t = 0".into()));
        }
        let mut grid = stats.t_grid.clone();
        let extend = *grid.last().unwrap() < top;
        if extend {
            grid.push(top);
        }
        let n = grid.len();
        let mut rho = vec![0.0; n * n];
        for i in 0..m {
            for j in 0..m {
                rho[i * n + j] = stats.rho_at(i, j);
            }
        }
        let row_integrals: Vec<f64> = (0..n).map(|i| trapezoid(&grid, &rho[i * n..(i + 1) * n])).collect();
        let total = trapezoid(&grid, &row_integrals);
        Ok(Self { sigma: stats.sigma, top, grid, rho, row_integrals, total })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `∬ ρ`, which equals `Var[Z^h]`.
    pub fn double_integral(&self) -> f64 {
        self.total
    }

    fn bracket(&self, t: f64) -> (usize, f64) {
        let n = self.grid.len();
        let j = self.grid.partition_point(|&g| g <= t).clamp(1, n - 1);
        let (a, b) = (self.grid[j - 1], self.grid[j]);
        (j - 1, ((t - a) / (b - a)).clamp(0.0, 1.0))
    }

    /// Bilinear interpolation of `ρ`.
    pub fn rho(&self, s: f64, t: f64) -> f64 {
        let n = self.grid.len();
        let (i, a) = self.bracket(s);
        let (j, b) = self.bracket(t);
        let r = |p: usize, q: usize| self.rho[p * n + q];
        (1.0 - a) * ((1.0 - b) * r(i, j) + b * r(i, j + 1)) + a * ((1.0 - b) * r(i + 1, j) + b * r(i + 1, j + 1))
    }

    /// `∫₀^{h(1⁻)} ρ(t, v) dv`, interpolated between grid rows.
    pub fn row_integral(&self, t: f64) -> f64 {
        interpolate(&self.grid, &self.row_integrals, t)
    }

    fn check_t(&self, t: f64) -> Result<()> {
        if !(t > 0.0 && t < self.top) {
            return Err(Error::Domain(format!("t = {t} outside (0, {})", self.top)));
        }
        Ok(())
    }

    /// Limit variance of `√T(ĥ⁻¹(t) − h⁻¹(t))`.
    pub fn inverse_variance(&self, h: &ResponseFunction, t: f64) -> Result<f64> {
        self.check_t(t)?;
        let slope = h.deriv(h.inverse(t));
        if !(slope > 0.0) {
            return Err(Error::Precondition(format!("h' vanishes at h⁻¹({t})")));
        }
        let c = t / slope;
        let v = self.rho(t, t) - 2.0 * c * self.row_integral(t) + c * c * self.total;
        Ok(self.sigma * self.sigma * v)
    }

    /// Limit variance of `√T(ĥ(u) − h(u))`.
    pub fn response_variance(&self, h: &ResponseFunction, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("u = {u} outside (0, 1)")));
        }
        check_not_flat(h, u)?;
        let (d, s) = (h.deriv(u), h.eval(u));
        let v = d * d * self.rho(s, s) - 2.0 * d * s * self.row_integral(s) + s * s * self.total;
        Ok(self.sigma * self.sigma * v)
    }

    /// Limit variance of `√T(Ŷ_t − Y_t)`: `σ² ∫₀¹ ρ(h(y), h(y)) dy`.
    pub fn corollary_variance(&self, h: &ResponseFunction) -> f64 {
        let n = COROLLARY_POINTS;
        let sum: f64 = (0..n)
            .map(|i| {
                let t = h.eval((i as f64 + 0.5) / n as f64);
                self.rho(t, t)
            })
            .sum();
        self.sigma * self.sigma * sum / n as f64
    }
}

pub(crate) fn check_not_flat(h: &ResponseFunction, u: f64) -> Result<()> {
    if h.is_constant() || !(h.deriv(u) > 0.0) {
        return Err(Error::Precondition(format!("the response must have a positive derivative at u = {u}")));
    }
    Ok(())
}

/// `σ² Var[Z^h]`, the limit variance of `√T(μ̂/μ − 1)`.
pub fn intensity_variance(stats: &CycleStatistics) -> f64 {
    stats.sigma * stats.sigma * stats.var_zh.value
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::statistics::Estimate;

    /// A separable surface ρ(s, t) = f(s) f(t) with f(t) = t(2 − t) on [0, 2].
    fn synthetic(points: usize) -> CycleStatistics {
        let grid: Vec<f64> = (0..points).map(|i| 2.0 * i as f64 / (points - 1) as f64).collect();
        let f = |t: f64| t * (2.0 - t);
        let rho = grid.iter().flat_map(|&s| grid.iter().map(move |&t| f(s) * f(t))).collect();
        let e = Estimate { value: 0.0, se: 0.0 };
        CycleStatistics {
            sigma: 1.0,
            step: 1e-4,
            n_cycles: 1000,
            mean_tau1: e,
            mean_tau1_sq: e,
            var_zh: e,
            ergodic_y: e,
            ergodic_h: e,
            tau1_lag1_autocorrelation: 0.0,
            mean_ze: vec![e; points],
            rho_se: vec![0.0; points * points],
            t_grid: grid,
            rho,
        }
    }

    #[test]
    fn quadrature_of_a_separable_surface() {
        let h = ResponseFunction::linear();
        let s = RhoSurface::new(&synthetic(401), &h).unwrap();
        // ∫₀² t(2 − t) dt = 4/3.
        assert!((s.double_integral() - 16.0 / 9.0).abs() < 1e-4);
        assert!((s.row_integral(1.0) - 4.0 / 3.0).abs() < 1e-4);
        // t = 1: ρ = 1, c = 1/2.
        let v = s.inverse_variance(&h, 1.0).unwrap();
        assert!((v - (1.0 - 4.0 / 3.0 + 0.25 * 16.0 / 9.0)).abs() < 1e-4);
        let w = s.response_variance(&h, 0.5).unwrap();
        assert!((w - (4.0 - 4.0 * 4.0 / 3.0 + 16.0 / 9.0)).abs() < 1e-4);
        // ∫₀¹ (2y(2 − 2y))² dy = 16 ∫ y²(1 − y)² = 16/30.
        assert!((s.corollary_variance(&h) - 16.0 / 30.0).abs() < 1e-4);
    }

    #[test]
    fn grid_is_closed_at_the_top() {
        let h = ResponseFunction::linear();
        let mut st = synthetic(5);
        st.t_grid = st.t_grid.iter().map(|t| t * 0.9).collect();
        let s = RhoSurface::new(&st, &h).unwrap();
        assert_eq!(s.rho(2.0, 2.0), 0.0);
    }

    #[test]
    fn flat_responses_are_rejected() {
        let s = RhoSurface::new(&synthetic(9), &ResponseFunction::linear()).unwrap();
        assert!(matches!(s.response_variance(&ResponseFunction::constant(), 0.5), Err(Error::Precondition(_))));
        assert!(s.inverse_variance(&ResponseFunction::linear(), 2.0).is_err());
    }
}
