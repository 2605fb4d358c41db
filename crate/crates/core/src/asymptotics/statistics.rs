//! Monte Carlo summaries over independent cycles.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use super::cycle::{CycleSampler, Functionals};
use crate::error::{Error, Result};
use crate::model::ResponseFunction;
use crate::rng::{self, Domain};
use crate::stats::{lag1_autocorrelation, Moments};

pub const DEFAULT_STEP: f64 = 1e-4;
pub const DEFAULT_CYCLES: usize = 100_000;
pub const MIN_CYCLES: usize = 1_000;
pub const DEFAULT_GRID_POINTS: usize = 33;

/// `Var[Z^h]` for `h(u) = 2u`, `σ = 1`: the Kac moment formula for Brownian
/// motion killed on leaving (−1, 1) evaluated by quadrature.
pub const LINEAR_VAR_ZH: f64 = 1.0 / 45.0;

/// `points` equispaced values on `[0, 0.97·h(1⁻)]`.
pub fn default_t_grid(h: &ResponseFunction, points: usize) -> Vec<f64> {
    let top = 0.97 * h.left_limit_at_one();
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|i| top * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Estimate with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    pub fn z_score(&self, target: f64) -> f64 {
        if self.se > 0.0 {
            (self.value - target) / self.se
        } else if self.value == target {
            0.0
        } else {
            f64::INFINITY.copysign(self.value - target)
        }
    }

    pub fn within(&self, target: f64, n_se: f64) -> bool {
        (self.value - target).abs() <= n_se * self.se
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleStatistics {
    pub sigma: f64,
    pub step: f64,
    pub n_cycles: usize,
    pub mean_tau1: Estimate,
    pub mean_tau1_sq: Estimate,
    pub var_zh: Estimate,
    /// `σ² E[∫₀^τ Y dt]`, which equals ∫₀¹ y dy = 1/2.
    pub ergodic_y: Estimate,
    /// `σ² E[∫₀^τ h(Y) dt]`, which equals ∫₀¹ h = 1.
    pub ergodic_h: Estimate,
    pub tau1_lag1_autocorrelation: f64,
    pub t_grid: Vec<f64>,
    pub mean_ze: Vec<Estimate>,
    /// Row-major `t_grid.len()²` covariance matrix of `Z_e`.
    pub rho: Vec<f64>,
    pub rho_se: Vec<f64>,
}

impl CycleStatistics {
    pub fn grid_len(&self) -> usize {
        self.t_grid.len()
    }

    pub fn rho_at(&self, i: usize, j: usize) -> f64 {
        self.rho[i * self.grid_len() + j]
    }

    pub fn rho_se_at(&self, i: usize, j: usize) -> f64 {
        self.rho_se[i * self.grid_len() + j]
    }
}

/// Raw per-cycle values, kept in cycle-index order.
#[derive(Debug, Clone)]
struct CycleRow {
    tau: f64,
    zh: f64,
    int_y: f64,
    int_h: f64,
    ze: Vec<f64>,
}

/// `n` exit times from cycle streams `0..n` of `seed`.
pub fn exit_times(sigma: f64, step: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    let sampler = CycleSampler::new(sigma, step)?;
    Ok((0..n as u64).into_par_iter().map(|i| sampler.exit_time(&mut rng::stream(seed, Domain::Cycle, i))).collect())
}

pub fn cycle_statistics(
    sigma: f64,
    h: &ResponseFunction,
    t_grid: &[f64],
    n_cycles: usize,
    step: f64,
    seed: u64,
) -> Result<CycleStatistics> {
    cycle_statistics_with_exit_times(sigma, h, t_grid, n_cycles, step, seed).map(|(s, _)| s)
}

/// [`cycle_statistics`] together with the `τ₁` sample it was built from; the
/// exit times equal those of [`exit_times`] with the same seed.
pub fn cycle_statistics_with_exit_times(
    sigma: f64,
    h: &ResponseFunction,
    t_grid: &[f64],
    n_cycles: usize,
    step: f64,
    seed: u64,
) -> Result<(CycleStatistics, Vec<f64>)> {
    if n_cycles < MIN_CYCLES {
        return Err(Error::Precondition(format!("at least {MIN_CYCLES} cycles are required, got {n_cycles}")));
    }
    let sampler = CycleSampler::new(sigma, step)?;
    // Validates the grid once before spawning work.
    Functionals::new(h, t_grid)?;
    let rows: Vec<CycleRow> = (0..n_cycles as u64)
        .into_par_iter()
        .map_init(
            || Functionals::new(h, t_grid).expect("grid validated"),
            |acc, i| {
                acc.reset();
                let mut rng = rng::stream(seed, Domain::Cycle, i);
                let tau = sampler.walk(&mut rng, acc);
                debug_assert!((tau - acc.tau).abs() <= 1e-9 * tau.max(1.0));
                CycleRow { tau, zh: acc.zh(), int_y: acc.int_y, int_h: acc.int_h, ze: acc.ze() }
            },
        )
        .collect();
    let stats = summarize(sigma, step, t_grid, &rows);
    Ok((stats, rows.into_iter().map(|r| r.tau).collect()))
}

fn estimate_mean(xs: &[f64]) -> Estimate {
    let m = Moments::of(xs);
    Estimate { value: m.mean, se: m.std_error() }
}

fn summarize(sigma: f64, step: f64, t_grid: &[f64], rows: &[CycleRow]) -> CycleStatistics {
    let n = rows.len();
    let s2 = sigma * sigma;
    let column = |f: &dyn Fn(&CycleRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let tau = column(&|r| r.tau);
    let tau_sq = column(&|r| r.tau * r.tau);
    let zh = column(&|r| r.zh);
    let ey = column(&|r| s2 * r.int_y);
    let eh = column(&|r| s2 * r.int_h);
    let zh_m = Moments::of(&zh);
    let var_zh = Estimate { value: zh_m.variance, se: zh_m.variance_std_error(&zh) };

    let m = t_grid.len();
    let mut mean = vec![0.0; m];
    for r in rows {
        for (acc, x) in mean.iter_mut().zip(&r.ze) {
            *acc += x;
        }
    }
    mean.iter_mut().for_each(|x| *x /= n as f64);
    let mut rho = vec![0.0; m * m];
    let mut rho_se = vec![0.0; m * m];
    let mut products = vec![0.0; n];
    for i in 0..m {
        for j in i..m {
            for (p, r) in products.iter_mut().zip(rows) {
                *p = (r.ze[i] - mean[i]) * (r.ze[j] - mean[j]);
            }
            let pm = Moments::of(&products);
            let cov = pm.mean * n as f64 / (n as f64 - 1.0);
            rho[i * m + j] = cov;
            rho[j * m + i] = cov;
            rho_se[i * m + j] = pm.std_error();
            rho_se[j * m + i] = pm.std_error();
        }
    }
    let mean_ze = (0..m)
        .map(|i| {
            let xs = column(&|r| r.ze[i]);
            estimate_mean(&xs)
        })
        .collect();
    CycleStatistics {
        sigma,
        step,
        n_cycles: n,
        mean_tau1: estimate_mean(&tau),
        mean_tau1_sq: estimate_mean(&tau_sq),
        var_zh,
        ergodic_y: estimate_mean(&ey),
        ergodic_h: estimate_mean(&eh),
        tau1_lag1_autocorrelation: lag1_autocorrelation(&tau),
        t_grid: t_grid.to_vec(),
        mean_ze,
        rho,
        rho_se,
    }
}

/// Exit-time moments from a sample of `τ₁`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HittingMoments {
    pub n: usize,
    pub mean: Estimate,
    pub mean_sq: Estimate,
    pub lag1_autocorrelation: f64,
}

pub fn hitting_moments(taus: &[f64]) -> HittingMoments {
    let sq: Vec<f64> = taus.iter().map(|t| t * t).collect();
    HittingMoments {
        n: taus.len(),
        mean: estimate_mean(taus),
        mean_sq: estimate_mean(&sq),
        lag1_autocorrelation: lag1_autocorrelation(taus),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceRow {
    pub gamma: f64,
    pub monte_carlo: Estimate,
    pub closed_form: f64,
    pub z_score: f64,
}

/// `E[e^{−γτ₁}] = 1 / cosh(√(2γ)/σ)`.
pub fn laplace_closed_form(sigma: f64, gamma: f64) -> f64 {
    1.0 / ((2.0 * gamma).sqrt() / sigma).cosh()
}

pub fn laplace_report(taus: &[f64], sigma: f64, gammas: &[f64]) -> Result<Vec<LaplaceRow>> {
    gammas
        .iter()
        .map(|&gamma| {
            if !(gamma > 0.0 && gamma.is_finite()) {
                return Err(Error::Domain(format!("gamma must be positive, got {gamma}")));
            }
            let xs: Vec<f64> = taus.iter().map(|t| (-gamma * t).exp()).collect();
            let monte_carlo = estimate_mean(&xs);
            let closed_form = laplace_closed_form(sigma, gamma);
            Ok(LaplaceRow { gamma, monte_carlo, closed_form, z_score: monte_carlo.z_score(closed_form) })
        })
        .collect()
}

pub fn laplace_check(sigma: f64, gammas: &[f64], n_cycles: usize, step: f64, seed: u64) -> Result<Vec<LaplaceRow>> {
    laplace_report(&exit_times(sigma, step, n_cycles, seed)?, sigma, gammas)
}

const SCALAR_HEADER: &str = "name,value,se";
const ZE_HEADER: &str = "t,mean_ze,se";
const RHO_HEADER: &str = "t1,t2,rho,se";

/// Renders three blank-line separated CSV blocks: scalars, `Z_e` means and the
/// `ρ` matrix.
pub fn render_statistics(s: &CycleStatistics) -> String {
    let mut out = String::new();
    out.push_str(SCALAR_HEADER);
    out.push('\n');
    let plain = |out: &mut String, name: &str, v: String| {
        let _ = writeln!(out, "{name},{v},");
    };
    plain(&mut out, "n_cycles", s.n_cycles.to_string());
    plain(&mut out, "sigma", s.sigma.to_string());
    plain(&mut out, "step", s.step.to_string());
    for (name, e) in [
        ("mean_tau1", s.mean_tau1),
        ("mean_tau1_sq", s.mean_tau1_sq),
        ("var_zh", s.var_zh),
        ("ergodic_y", s.ergodic_y),
        ("ergodic_h", s.ergodic_h),
    ] {
        let _ = writeln!(out, "{name},{},{}", e.value, e.se);
    }
    plain(&mut out, "tau1_lag1_autocorrelation", s.tau1_lag1_autocorrelation.to_string());
    out.push('\n');
    out.push_str(ZE_HEADER);
    out.push('\n');
    for (t, e) in s.t_grid.iter().zip(&s.mean_ze) {
        let _ = writeln!(out, "{t},{},{}", e.value, e.se);
    }
    out.push('\n');
    out.push_str(RHO_HEADER);
    out.push('\n');
    for (i, t1) in s.t_grid.iter().enumerate() {
        for (j, t2) in s.t_grid.iter().enumerate() {
            let _ = writeln!(out, "{t1},{t2},{},{}", s.rho_at(i, j), s.rho_se_at(i, j));
        }
    }
    out
}

pub fn write_statistics(s: &CycleStatistics, path: &Path) -> Result<()> {
    std::fs::write(path, render_statistics(s)).map_err(|e| Error::io(path, e))
}

pub fn read_statistics(path: &Path) -> Result<CycleStatistics> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_statistics(&text, path)
}

pub fn parse_statistics(text: &str, origin: &Path) -> Result<CycleStatistics> {
    let err = |line: usize, message: String| Error::Parse { path: origin.to_path_buf(), line: line as u64, message };
    let mut blocks: Vec<Vec<(usize, Vec<&str>)>> = vec![Vec::new()];
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            if !blocks.last().unwrap().is_empty() {
                blocks.push(Vec::new());
            }
            continue;
        }
        blocks.last_mut().unwrap().push((i + 1, line.split(',').collect()));
    }
    blocks.retain(|b| !b.is_empty());
    if blocks.len() != 3 {
        return Err(err(0, format!("expected 3 blocks, found {}", blocks.len())));
    }
    for (block, header) in blocks.iter().zip([SCALAR_HEADER, ZE_HEADER, RHO_HEADER]) {
        let (line, fields) = &block[0];
        if fields.join(",") != header {
            return Err(err(*line, format!("expected header `{header}`")));
        }
    }
    let num = |line: usize, raw: &str| -> Result<f64> {
        raw.trim().parse().map_err(|_| err(line, format!("cannot parse `{raw}`")))
    };
    let mut scalars = std::collections::BTreeMap::new();
    for (line, f) in &blocks[0][1..] {
        if f.len() != 3 {
            return Err(err(*line, "expected 3 fields".into()));
        }
        let se = if f[2].is_empty() { 0.0 } else { num(*line, f[2])? };
        scalars.insert(f[0].to_string(), (*line, num(*line, f[1])?, se));
    }
    let get = |name: &str| -> Result<Estimate> {
        scalars
            .get(name)
            .map(|&(_, value, se)| Estimate { value, se })
            .ok_or_else(|| err(0, format!("missing scalar `{name}`")))
    };
    let mut t_grid = Vec::new();
    let mut mean_ze = Vec::new();
    for (line, f) in &blocks[1][1..] {
        if f.len() != 3 {
            return Err(err(*line, "expected 3 fields".into()));
        }
        t_grid.push(num(*line, f[0])?);
        mean_ze.push(Estimate { value: num(*line, f[1])?, se: num(*line, f[2])? });
    }
    let m = t_grid.len();
    if blocks[2].len() - 1 != m * m {
        return Err(err(0, format!("expected {} rho entries", m * m)));
    }
    let mut rho = Vec::with_capacity(m * m);
    let mut rho_se = Vec::with_capacity(m * m);
    for (idx, (line, f)) in blocks[2][1..].iter().enumerate() {
        if f.len() != 4 {
            return Err(err(*line, "expected 4 fields".into()));
        }
        let (t1, t2) = (num(*line, f[0])?, num(*line, f[1])?);
        if t1 != t_grid[idx / m] || t2 != t_grid[idx % m] {
            return Err(err(*line, "rho entries out of grid order".into()));
        }
        rho.push(num(*line, f[2])?);
        rho_se.push(num(*line, f[3])?);
    }
    Ok(CycleStatistics {
        sigma: get("sigma")?.value,
        step: get("step")?.value,
        n_cycles: get("n_cycles")?.value as usize,
        mean_tau1: get("mean_tau1")?,
        mean_tau1_sq: get("mean_tau1_sq")?,
        var_zh: get("var_zh")?,
        ergodic_y: get("ergodic_y")?,
        ergodic_h: get("ergodic_h")?,
        tau1_lag1_autocorrelation: get("tau1_lag1_autocorrelation")?.value,
        t_grid,
        mean_ze,
        rho,
        rho_se,
    })
}
