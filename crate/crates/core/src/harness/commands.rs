use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::ExperimentConfig;
use crate::asymptotics::{
    clt_verify_h, clt_verify_hinv, clt_verify_mu, corollary_check, cycle_statistics_with_exit_times, default_t_grid,
    hitting_moments, intensity_variance, laplace_report, rate_check, write_statistics, CltReport, CycleStatistics,
    Profile, RhoSurface,
};
use crate::error::{Error, Result};
use crate::estimation::io::{read_event_stream, write_columns, write_h_hat, write_h_inverse};
use crate::estimation::{check_regime, estimate, RegimeReport};
use crate::kv::{self, KeyValues};
use crate::model::io::{meta_path, write_record};
use crate::model::{simulate, simulate_events, ResponseFunction};
use crate::stats::quantile_sorted;

/// Runs `f` on a pool of `threads` workers, or the global pool for `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot start {n} worker threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn prepare_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

const SIMULATE_CHUNK: usize = 32;

/// Writes `record_<i>.csv` (and its `.meta`) for replicates `0..reps`.
pub fn cmd_simulate(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let h = config.response.load()?;
    prepare_out(&config.out)?;
    let mut written = Vec::with_capacity(config.reps);
    for start in (0..config.reps).step_by(SIMULATE_CHUNK) {
        let end = (start + SIMULATE_CHUNK).min(config.reps);
        let records =
            (start..end).into_par_iter().map(|i| simulate(&config.params, &h, i as u64)).collect::<Result<Vec<_>>>()?;
        for (i, rec) in (start..end).zip(records) {
            let path = config.out.join(format!("record_{i}.csv"));
            write_record(&rec, &path)?;
            written.push(path);
        }
    }
    Ok(written)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EstimateOptions {
    pub events: PathBuf,
    /// Overrides the `horizon` of the metadata sidecar.
    pub horizon: Option<f64>,
    /// Overrides the `bins` of the sidecar; otherwise the config value is used.
    pub bins: Option<usize>,
    /// Times at which to report `Ŷ_t` (and `B_t + Ŷ_t` for event times).
    pub times: Vec<f64>,
}

/// Writes `h_hat.csv`, `h_inv_hat.csv`, `estimate.meta` and, for requested
/// times, `y_hat.csv`.
pub fn cmd_estimate(config: &ExperimentConfig, opts: &EstimateOptions) -> Result<Vec<PathBuf>> {
    let stream = read_event_stream(&opts.events, opts.horizon)?;
    let meta = meta_path(&opts.events);
    let bins = match opts.bins {
        Some(k) => k,
        None if meta.exists() => match kv::read(&meta)?.get("bins") {
            Some(raw) => raw.parse().map_err(|_| Error::Config(format!("bad `bins` in {}", meta.display())))?,
            None => config.params.bins,
        },
        None => config.params.bins,
    };
    let result = estimate(&stream, bins)?;
    prepare_out(&config.out)?;
    let mut written = Vec::new();
    let hp = config.out.join("h_hat.csv");
    write_h_hat(&result, &hp)?;
    written.push(hp);
    let ip = config.out.join("h_inv_hat.csv");
    write_h_inverse(&result, &ip)?;
    written.push(ip);
    let mut summary = KeyValues::new();
    summary.insert("mu_hat".into(), result.mu_hat.to_string());
    summary.insert("horizon".into(), result.horizon.to_string());
    summary.insert("bins".into(), bins.to_string());
    summary.insert("events".into(), stream.len().to_string());
    let theta_mean = result.theta.iter().sum::<f64>() / bins as f64;
    summary.insert("theta_mean".into(), theta_mean.to_string());
    let sp = config.out.join("estimate.meta");
    kv::write(&sp, &summary)?;
    written.push(sp);
    if !opts.times.is_empty() {
        let has_bids = stream.bid_levels().is_some();
        let mut rows = Vec::with_capacity(opts.times.len());
        for &t in &opts.times {
            let y = result.estimate_y(&stream, t)?;
            let mut row = vec![t, y];
            if has_bids {
                row.push(result.estimate_price(&stream, t)?.unwrap_or(f64::NAN));
            }
            rows.push(row);
        }
        let header: &[&str] = if has_bids { &["t", "y_hat", "price_hat"] } else { &["t", "y_hat"] };
        let yp = config.out.join("y_hat.csv");
        write_columns(&yp, header, rows)?;
        written.push(yp);
    }
    Ok(written)
}

/// Monte Carlo mean of `ĥ` with pointwise 2.5%/97.5% replicate quantiles.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureData {
    pub grid: Vec<f64>,
    pub h_true: Vec<f64>,
    pub h_hat_mean: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    pub reps_used: usize,
    /// `ĥ` of replicate 0 on the same grid.
    pub sample_path: Vec<f64>,
}

pub const FIGURE_HEADER: [&str; 5] = ["u", "h_true", "h_hat_mean", "ci_low", "ci_high"];
pub const SAMPLE_HEADER: [&str; 3] = ["u", "h_true", "h_hat"];

pub fn figure_data(config: &ExperimentConfig, h: &ResponseFunction) -> Result<FigureData> {
    config.validate()?;
    let n = config.u_grid;
    let grid: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
    let k = config.params.bins;
    let curves = (0..config.reps as u64)
        .into_par_iter()
        .map(|r| {
            let stream = simulate_events(&config.params, h, r)?;
            let est = estimate(&stream, k)?;
            grid.iter().map(|&u| est.h_hat(u)).collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let reps = curves.len();
    let mut h_hat_mean = Vec::with_capacity(n);
    let mut ci_low = Vec::with_capacity(n);
    let mut ci_high = Vec::with_capacity(n);
    let mut column = vec![0.0; reps];
    for i in 0..n {
        for (c, curve) in column.iter_mut().zip(&curves) {
            *c = curve[i];
        }
        h_hat_mean.push(column.iter().sum::<f64>() / reps as f64);
        column.sort_by(f64::total_cmp);
        ci_low.push(quantile_sorted(&column, 0.025));
        ci_high.push(quantile_sorted(&column, 0.975));
    }
    Ok(FigureData {
        h_true: grid.iter().map(|&u| h.eval(u)).collect(),
        sample_path: curves[0].clone(),
        grid,
        h_hat_mean,
        ci_low,
        ci_high,
        reps_used: reps,
    })
}

/// Writes `figure_<kind>.csv`, its `.meta` and `sample_<kind>.csv`.
pub fn cmd_figures(config: &ExperimentConfig) -> Result<(FigureData, Vec<PathBuf>)> {
    let h = config.response.load()?;
    let data = figure_data(config, &h)?;
    prepare_out(&config.out)?;
    let label = config.response.label();
    let fp = config.out.join(format!("figure_{label}.csv"));
    let rows = (0..data.grid.len())
        .map(|i| vec![data.grid[i], data.h_true[i], data.h_hat_mean[i], data.ci_low[i], data.ci_high[i]]);
    write_columns(&fp, &FIGURE_HEADER, rows)?;
    let mut meta = config.to_key_values();
    meta.remove("out");
    meta.remove("threads");
    meta.insert("reps_used".into(), data.reps_used.to_string());
    kv::write(&meta_path(&fp), &meta)?;
    let sp = config.out.join(format!("sample_{label}.csv"));
    let rows = (0..data.grid.len()).map(|i| vec![data.grid[i], data.h_true[i], data.sample_path[i]]);
    write_columns(&sp, &SAMPLE_HEADER, rows)?;
    Ok((data, vec![fp.clone(), meta_path(&fp), sp]))
}

/// One line of the limit-theory report.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub check: String,
    pub estimate: f64,
    pub se: f64,
    pub target: f64,
    pub z: f64,
    /// `None` when the check could not run; see `note`.
    pub pass: Option<bool>,
    pub note: String,
}

impl CheckRow {
    fn z_check(check: &str, estimate: f64, se: f64, target: f64) -> Self {
        let z = if se > 0.0 {
            (estimate - target) / se
        } else if estimate == target {
            0.0
        } else {
            f64::INFINITY
        };
        CheckRow {
            check: check.into(),
            estimate,
            se,
            target,
            z,
            pass: Some(z.abs() <= 3.0),
            note: "within 3 SE".into(),
        }
    }

    fn skipped(check: &str, err: &Error) -> Self {
        CheckRow {
            check: check.into(),
            estimate: f64::NAN,
            se: f64::NAN,
            target: f64::NAN,
            z: f64::NAN,
            pass: None,
            note: format!("skipped: {err}"),
        }
    }

    fn variance(check: &str, r: &CltReport, tolerance: f64) -> Self {
        CheckRow {
            check: check.into(),
            estimate: r.variance.value,
            se: r.variance.se,
            target: r.target_variance,
            z: r.variance_z(),
            pass: Some(r.relative_error.abs() <= tolerance),
            note: format!("relative error {:+.4}, tolerance {tolerance}", r.relative_error),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticsReport {
    pub statistics: CycleStatistics,
    pub rows: Vec<CheckRow>,
}

impl AsymptoticsReport {
    pub fn render(&self) -> String {
        let mut out = String::from("check,estimate,se,target,z,pass,note\n");
        for r in &self.rows {
            let pass = match r.pass {
                Some(true) => "pass",
                Some(false) => "fail",
                None => "skipped",
            };
            let note = r.note.replace(',', ";");
            let _ = writeln!(out, "{},{},{},{},{},{pass},{note}", r.check, r.estimate, r.se, r.target, r.z);
        }
        out
    }
}

pub const LAPLACE_GAMMAS: [f64; 3] = [0.5, 1.0, 2.0];

/// Cycle oracle, Laplace and moment checks, and the replicate studies at the
/// configured profile. Writes `cycle_statistics.csv` and
/// `asymptotics_report.csv`.
pub fn cmd_asymptotics(config: &ExperimentConfig) -> Result<(AsymptoticsReport, Vec<PathBuf>)> {
    config.validate()?;
    let h = config.response.load()?;
    let p = config.params;
    let sigma = p.sigma;
    let s2 = sigma * sigma;
    let grid = default_t_grid(&h, config.t_grid);
    let (stats, taus) = cycle_statistics_with_exit_times(sigma, &h, &grid, config.cycles, config.step, p.seed)?;
    let mut rows = Vec::new();
    let m = hitting_moments(&taus);
    rows.push(CheckRow::z_check("mean_tau1", m.mean.value, m.mean.se, 1.0 / s2));
    rows.push(CheckRow::z_check("mean_tau1_sq", m.mean_sq.value, m.mean_sq.se, 5.0 / (3.0 * s2 * s2)));
    for l in laplace_report(&taus, sigma, &LAPLACE_GAMMAS)? {
        rows.push(CheckRow::z_check(
            &format!("laplace_gamma_{}", l.gamma),
            l.monte_carlo.value,
            l.monte_carlo.se,
            l.closed_form,
        ));
    }
    rows.push(CheckRow::z_check("ergodic_y", stats.ergodic_y.value, stats.ergodic_y.se, 0.5));
    rows.push(CheckRow::z_check("ergodic_h", stats.ergodic_h.value, stats.ergodic_h.se, 1.0));
    let bound = 3.0 / (taus.len() as f64).sqrt();
    rows.push(CheckRow {
        check: "tau1_lag1_autocorrelation".into(),
        estimate: m.lag1_autocorrelation,
        se: 1.0 / (taus.len() as f64).sqrt(),
        target: 0.0,
        z: m.lag1_autocorrelation * (taus.len() as f64).sqrt(),
        pass: Some(m.lag1_autocorrelation.abs() <= bound),
        note: format!("bound {bound:.3e}"),
    });
    rows.push(CheckRow {
        check: "var_zh".into(),
        estimate: stats.var_zh.value,
        se: stats.var_zh.se,
        target: f64::NAN,
        z: f64::NAN,
        pass: Some(stats.var_zh.value >= 0.0),
        note: "oracle value".into(),
    });

    let profile = Profile::auto(p);
    let reps = config.reps;
    match clt_verify_mu(&[profile], &h, reps, intensity_variance(&stats)) {
        Ok(r) => {
            let r = &r[0];
            let mut row = CheckRow::variance("clt_mu_variance", r, 0.15);
            let normal = r.normality.p_value > 0.01;
            row.pass = row.pass.map(|v| v && normal);
            row.note = format!("{}; Jarque-Bera p {:.4}", row.note, r.normality.p_value);
            rows.push(row);
        }
        Err(e) => rows.push(CheckRow::skipped("clt_mu_variance", &e)),
    }
    let surface = RhoSurface::new(&stats, &h);
    let with_surface = |f: &dyn Fn(&RhoSurface) -> Result<f64>| match &surface {
        Ok(s) => f(s),
        Err(e) => Err(Error::Precondition(e.to_string())),
    };
    let t_point = h.eval(0.5);
    let hinv = with_surface(&|s| s.inverse_variance(&h, t_point))
        .and_then(|target| clt_verify_hinv(&[profile], &h, t_point, reps, target));
    match hinv {
        Ok(r) => rows.push(CheckRow::variance(&format!("clt_hinv_variance_t_{t_point}"), &r[0], 0.20)),
        Err(e) => rows.push(CheckRow::skipped("clt_hinv_variance", &e)),
    }
    let hv = with_surface(&|s| s.response_variance(&h, 0.5))
        .and_then(|target| clt_verify_h(&[profile], &h, 0.5, reps, target));
    match hv {
        Ok(r) => rows.push(CheckRow::variance("clt_h_variance_u_0.5", &r[0], 0.20)),
        Err(e) => rows.push(CheckRow::skipped("clt_h_variance", &e)),
    }
    let cor = with_surface(&|s| Ok(s.corollary_variance(&h)))
        .and_then(|target| corollary_check(&[profile], &h, reps, target));
    match cor {
        Ok(r) => {
            let r = &r[0];
            rows.push(CheckRow::z_check("price_recovery_mean", r.mean.value, r.mean.se, 0.0));
            rows.push(CheckRow::variance("price_recovery_variance", r, 0.25));
        }
        Err(e) => rows.push(CheckRow::skipped("price_recovery", &e)),
    }
    match rate_check(&profile, &profile.scaled(4.0), &h, t_point, reps) {
        Ok(r) => rows.push(CheckRow {
            check: "rate_rmse_ratio".into(),
            estimate: r.rmse_ratio,
            se: f64::NAN,
            target: r.horizon_ratio.sqrt(),
            z: f64::NAN,
            pass: Some((1.6..=2.4).contains(&r.rmse_ratio)),
            note: format!("horizons {} and {}", r.short.params.horizon, r.long.params.horizon),
        }),
        Err(e) => rows.push(CheckRow::skipped("rate_rmse_ratio", &e)),
    }

    prepare_out(&config.out)?;
    let sp = config.out.join("cycle_statistics.csv");
    write_statistics(&stats, &sp)?;
    let report = AsymptoticsReport { statistics: stats, rows };
    let rp = config.out.join("asymptotics_report.csv");
    std::fs::write(&rp, report.render()).map_err(|e| Error::io(&rp, e))?;
    Ok((report, vec![sp, rp]))
}

pub fn cmd_regime_check(config: &ExperimentConfig) -> Result<RegimeReport> {
    config.params.validate()?;
    Ok(check_regime(&config.params))
}
