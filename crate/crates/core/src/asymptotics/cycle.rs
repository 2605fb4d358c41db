//! One regeneration cycle: `W` from 0 until it leaves `(−1/σ, 1/σ)`.
//!
//! The walk is carried out in `z = σW`, where the barriers sit at ±1 and
//! `Y = {z}`. Steps are exact Gaussian increments; between grid points a
//! Brownian-bridge test catches excursions past a barrier that the grid
//! misses, and the exit time inside the final step is the conditional mean of
//! the bridge's first-passage time.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::model::{ResponseFunction, ONE_MINUS};
use crate::quadrature::GaussLegendre;
use crate::rng::StreamRng;

const EXIT_NODES: usize = 96;

/// Stands in for `0⁺`: above every threshold `h⁻¹(t) = 0`.
const ZERO_PLUS: f64 = f64::MIN_POSITIVE;

/// Below this value of `2ab/s²` the crossing probability is evaluated; above
/// it `exp(−x)` is under 1e-17 and the test is skipped.
const CROSSING_CUTOFF: f64 = 40.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CycleSample {
    pub tau1: f64,
    pub grid_times: Vec<f64>,
    /// `W` on `grid_times`; the last entry is exactly ±1/σ.
    pub w_grid: Vec<f64>,
    pub zh: f64,
    /// `Z_e(t)` on the t-grid passed to [`CycleSampler::sample`].
    pub ze: Vec<f64>,
}

/// Probability that a Brownian bridge with variance `var` over its span,
/// starting `a` and ending `b` below a barrier, touches the barrier.
pub fn bridge_crossing_probability(a: f64, b: f64, var: f64) -> f64 {
    if a <= 0.0 || b <= 0.0 {
        return 1.0;
    }
    (-2.0 * a * b / var).exp()
}

/// Receives trapezoid weights: each call adds `weight · g(y)` to ∫ g(Y).
pub(crate) trait Observer {
    fn point(&mut self, y: f64, weight: f64);
    fn grid(&mut self, _time: f64, _z: f64) {}
}

struct Nothing;

impl Observer for Nothing {
    #[inline]
    fn point(&mut self, _y: f64, _weight: f64) {}
}

#[derive(Debug, Clone)]
pub struct CycleSampler {
    sigma: f64,
    step: f64,
    sd: f64,
    exit_rule: GaussLegendre,
}

impl CycleSampler {
    pub fn new(sigma: f64, step: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParams(format!("sigma must be positive, got {sigma}")));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidParams(format!("step must be positive, got {step}")));
        }
        Ok(Self { sigma, step, sd: sigma * step.sqrt(), exit_rule: GaussLegendre::new(EXIT_NODES) })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Expected first-passage time, as a fraction of the step, of a bridge
    /// that starts `a` and ends `c` step standard deviations from the barrier
    /// it is known to touch.
    ///
    /// The density is proportional to
    /// `r^{-3/2} (1−r)^{-1/2} exp(−a²/2r − c²/2(1−r))` for both an end point
    /// past the barrier and, by reflection, one back inside.
    pub fn bridge_exit_fraction(&self, a: f64, c: f64) -> f64 {
        if a <= 0.0 {
            return 0.0;
        }
        let mut logs = [0.0; EXIT_NODES];
        let mut rs = [0.0; EXIT_NODES];
        let mut top = f64::NEG_INFINITY;
        for (i, &x) in self.exit_rule.nodes.iter().enumerate() {
            let v = 0.5 * (x + 1.0);
            let r = 0.5 * (1.0 - (std::f64::consts::PI * v).cos());
            let l = -1.5 * r.ln() - 0.5 * (-r).ln_1p() - a * a / (2.0 * r) - c * c / (2.0 * (1.0 - r))
                + (std::f64::consts::PI * v).sin().ln();
            rs[i] = r;
            logs[i] = l;
            top = top.max(l);
        }
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..EXIT_NODES {
            let e = self.exit_rule.weights[i] * (logs[i] - top).exp();
            num += e * rs[i];
            den += e;
        }
        let r = num / den;
        if r.is_finite() && (0.0..=1.0).contains(&r) {
            r
        } else {
            a / (a + c)
        }
    }

    /// Runs one cycle, reporting trapezoid weights to `obs`; returns `τ₁`.
    pub(crate) fn walk<O: Observer>(&self, rng: &mut StreamRng, obs: &mut O) -> f64 {
        let sd = self.sd;
        let var = sd * sd;
        let dt = self.step;
        let half = 0.5 * dt;
        let mut t = 0.0;
        let mut z = 0.0_f64;
        let mut pending = 0.0;
        obs.grid(0.0, 0.0);
        loop {
            let z1 = z + sd * Distribution::<f64>::sample(&StandardNormal, rng);
            // At an integer the one-sided limit is set by the direction of travel.
            let y = if z == 0.0 {
                if z1 < 0.0 {
                    ONE_MINUS
                } else {
                    ZERO_PLUS
                }
            } else {
                frac_inside(z)
            };
            let exit = if z1 >= 1.0 {
                Some((1.0, (1.0 - z) / sd, (z1 - 1.0) / sd))
            } else if z1 <= -1.0 {
                Some((-1.0, (z + 1.0) / sd, (-1.0 - z1) / sd))
            } else {
                let (au, bu) = (1.0 - z, 1.0 - z1);
                let (al, bl) = (z + 1.0, z1 + 1.0);
                let xu = 2.0 * au * bu / var;
                let xl = 2.0 * al * bl / var;
                if xu < CROSSING_CUTOFF || xl < CROSSING_CUTOFF {
                    let pu = bridge_crossing_probability(au, bu, var);
                    let pl = bridge_crossing_probability(al, bl, var);
                    let p = 1.0 - (1.0 - pu) * (1.0 - pl);
                    let draw: f64 = rng.random();
                    if draw < p {
                        let up = draw < p * pu / (pu + pl);
                        Some(if up { (1.0, au / sd, bu / sd) } else { (-1.0, al / sd, bl / sd) })
                    } else {
                        None
                    }
                } else {
                    None
                }
            };
            if let Some((barrier, a, c)) = exit {
                let r = self.bridge_exit_fraction(a, c);
                let tail = 0.5 * r * dt;
                obs.point(y, pending + tail);
                // Approaching +1 from below Y → 1⁻, approaching −1 from above Y → 0⁺.
                obs.point(if barrier > 0.0 { ONE_MINUS } else { ZERO_PLUS }, tail);
                let tau = t + r * dt;
                obs.grid(tau, barrier);
                return tau;
            }
            if (z < 0.0) != (z1 < 0.0) && z != 0.0 {
                // Y jumps between 1⁻ and 0⁺ where z crosses 0; split the step there.
                let r = z / (z - z1);
                let (before, after) = if z > 0.0 { (ZERO_PLUS, ONE_MINUS) } else { (ONE_MINUS, ZERO_PLUS) };
                obs.point(y, pending + 0.5 * r * dt);
                obs.point(before, 0.5 * r * dt);
                obs.point(after, 0.5 * (1.0 - r) * dt);
                pending = 0.5 * (1.0 - r) * dt;
            } else {
                obs.point(y, pending + half);
                pending = half;
            }
            t += dt;
            z = z1;
            obs.grid(t, z);
        }
    }

    pub fn exit_time(&self, rng: &mut StreamRng) -> f64 {
        self.walk(rng, &mut Nothing)
    }

    /// One cycle with its skeleton, `Z^h` and `Z_e` on `t_grid`.
    pub fn sample(&self, h: &ResponseFunction, t_grid: &[f64], rng: &mut StreamRng) -> Result<CycleSample> {
        let mut acc = Functionals::new(h, t_grid)?;
        let mut rec = Recorder { acc: &mut acc, times: Vec::new(), z: Vec::new() };
        let tau1 = self.walk(rng, &mut rec);
        let Recorder { times, z, .. } = rec;
        let w_grid = z.iter().map(|z| z / self.sigma).collect();
        Ok(CycleSample { tau1, grid_times: times, w_grid, zh: acc.zh(), ze: acc.ze() })
    }
}

/// `{z}` for `z ∈ (−1, 1)`, kept strictly below 1.
#[inline]
fn frac_inside(z: f64) -> f64 {
    if z >= 0.0 {
        z
    } else {
        (z + 1.0).min(ONE_MINUS)
    }
}

/// Running one-cycle integrals: `τ`, `∫h(Y)`, `∫Y` and the occupation of `Y`
/// between consecutive thresholds `h⁻¹(t_i)`.
#[derive(Debug, Clone)]
pub(crate) struct Functionals<'a> {
    h: &'a ResponseFunction,
    thresholds: Vec<f64>,
    pub tau: f64,
    pub int_h: f64,
    pub int_y: f64,
    occupation: Vec<f64>,
}

impl<'a> Functionals<'a> {
    pub fn new(h: &'a ResponseFunction, t_grid: &[f64]) -> Result<Self> {
        let top = h.left_limit_at_one();
        let mut thresholds = Vec::with_capacity(t_grid.len());
        for &t in t_grid {
            if !(t >= 0.0 && t < top) {
                return Err(Error::Domain(format!("t-grid point {t} outside [0, {top})")));
            }
            thresholds.push(h.inverse(t));
        }
        if thresholds.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Domain("t-grid must be ascending".into()));
        }
        Ok(Self { h, occupation: vec![0.0; thresholds.len() + 1], thresholds, tau: 0.0, int_h: 0.0, int_y: 0.0 })
    }

    pub fn reset(&mut self) {
        self.tau = 0.0;
        self.int_h = 0.0;
        self.int_y = 0.0;
        self.occupation.iter_mut().for_each(|o| *o = 0.0);
    }

    pub fn zh(&self) -> f64 {
        self.int_h - self.tau
    }

    /// `Z_e(t_i) = ∫ 1{Y ≤ h⁻¹(t_i)} − h⁻¹(t_i) τ`.
    pub fn ze(&self) -> Vec<f64> {
        let mut below = 0.0;
        self.thresholds
            .iter()
            .zip(&self.occupation)
            .map(|(&y, &o)| {
                below += o;
                below - y * self.tau
            })
            .collect()
    }
}

impl Observer for Functionals<'_> {
    #[inline]
    fn point(&mut self, y: f64, weight: f64) {
        self.tau += weight;
        self.int_h += weight * self.h.eval(y);
        self.int_y += weight * y;
        let bucket = self.thresholds.partition_point(|&thr| thr < y);
        self.occupation[bucket] += weight;
    }
}

struct Recorder<'r, 'a> {
    acc: &'r mut Functionals<'a>,
    times: Vec<f64>,
    z: Vec<f64>,
}

impl Observer for Recorder<'_, '_> {
    fn point(&mut self, y: f64, weight: f64) {
        self.acc.point(y, weight);
    }

    fn grid(&mut self, time: f64, z: f64) {
        self.times.push(time);
        self.z.push(z);
    }
}

pub fn sample_cycle(
    sigma: f64,
    h: &ResponseFunction,
    t_grid: &[f64],
    step: f64,
    rng: &mut StreamRng,
) -> Result<CycleSample> {
    CycleSampler::new(sigma, step)?.sample(h, t_grid, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Domain};

    #[test]
    fn exit_fraction_matches_reference_values() {
        let s = CycleSampler::new(1.0, 1.0).unwrap();
        for (a, c, want) in
            [(0.3, 0.5, 0.219394107), (1.0, 0.1, 0.622743655), (0.05, 2.0, 0.020681882), (0.5, 0.5, 0.327839771)]
        {
            let got = s.bridge_exit_fraction(a, c);
            assert!((got / want - 1.0).abs() < 1e-5, "a={a} c={c}: {got} vs {want}");
        }
        assert_eq!(s.bridge_exit_fraction(0.0, 1.0), 0.0);
    }

    #[test]
    fn cycle_ends_on_a_barrier() {
        let sigma = 1.7;
        let s = CycleSampler::new(sigma, 1e-3).unwrap();
        let h = ResponseFunction::linear();
        for i in 0..50 {
            let c = s.sample(&h, &[0.5, 1.0], &mut stream(4, Domain::Cycle, i)).unwrap();
            assert!(c.tau1 > 0.0);
            assert_eq!(*c.grid_times.last().unwrap(), c.tau1);
            let last = *c.w_grid.last().unwrap();
            assert!(((last.abs() * sigma) - 1.0).abs() < 1e-12);
            let inner = &c.w_grid[..c.w_grid.len() - 1];
            assert!(inner.iter().all(|w| w.abs() < 1.0 / sigma));
            assert!(c.grid_times.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(c.ze.len(), 2);
        }
    }

    #[test]
    fn constant_response_gives_zero_zh() {
        let h = ResponseFunction::constant();
        let s = CycleSampler::new(1.0, 1e-3).unwrap();
        for i in 0..20 {
            let c = s.sample(&h, &[], &mut stream(1, Domain::Cycle, i)).unwrap();
            assert_eq!(c.zh, 0.0);
        }
    }

    #[test]
    fn integer_level_has_no_occupation() {
        // Y = 0 only at the start of a cycle, which is a one-sided limit
        let h = ResponseFunction::linear();
        let s = CycleSampler::new(1.0, 1e-2).unwrap();
        for i in 0..200 {
            let c = s.sample(&h, &[0.0, 1.0], &mut stream(6, Domain::Cycle, i)).unwrap();
            assert_eq!(c.ze[0], 0.0);
        }
    }

    #[test]
    fn exit_time_agrees_with_sample() {
        let s = CycleSampler::new(1.0, 1e-3).unwrap();
        let h = ResponseFunction::linear();
        let a = s.exit_time(&mut stream(2, Domain::Cycle, 5));
        let b = s.sample(&h, &[1.0], &mut stream(2, Domain::Cycle, 5)).unwrap();
        assert_eq!(a, b.tau1);
    }

    #[test]
    fn grid_outside_range_is_rejected() {
        let h = ResponseFunction::linear();
        assert!(matches!(sample_cycle(1.0, &h, &[2.0], 1e-3, &mut stream(0, Domain::Cycle, 0)), Err(Error::Domain(_))));
        assert!(CycleSampler::new(0.0, 1e-3).is_err());
        assert!(CycleSampler::new(1.0, -1.0).is_err());
    }
}
