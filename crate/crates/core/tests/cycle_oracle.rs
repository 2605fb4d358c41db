//! Regeneration-cycle statistics against Green's-function quadrature.
//!
//! For Brownian motion started at 0 and killed on leaving (−1, 1), the
//! occupation density is G(x, y) = (1 + min(x, y))(1 − max(x, y)). For an
//! additive functional Z = ∫₀^τ f(z_t) dt this gives
//! E[Z] = ∫ G(0, y) f(y) dy and E[Z²] = 2 ∫ G(0, x) f(x) v(x) dx with
//! v(x) = ∫ G(x, y) f(y) dy.

use cox_orderflow::asymptotics::{
    bridge_crossing_probability, cycle_statistics, exit_times, hitting_moments, CycleSampler, RhoSurface,
};
use cox_orderflow::model::ResponseFunction;

fn green(x: f64, y: f64) -> f64 {
    (1.0 + x.min(y)) * (1.0 - x.max(y))
}

/// Composite three-point Gauss rule over consecutive breakpoints; only
/// interior points are evaluated, so jumps at breakpoints are harmless.
fn gauss3(breaks: &[f64], n: usize, f: &dyn Fn(f64) -> f64) -> f64 {
    let x = (0.6f64).sqrt();
    let nodes = [(-x, 5.0 / 9.0), (0.0, 8.0 / 9.0), (x, 5.0 / 9.0)];
    breaks
        .windows(2)
        .map(|w| {
            let h = (w[1] - w[0]) / n as f64;
            let mut s = 0.0;
            for i in 0..n {
                let mid = w[0] + (i as f64 + 0.5) * h;
                for (p, wt) in nodes {
                    s += wt * f(mid + 0.5 * h * p);
                }
            }
            0.5 * h * s
        })
        .sum()
}

fn frac(z: f64) -> f64 {
    z - z.floor()
}

/// Variance of ∫₀^τ g(frac z_t) dt, where `kinks` lists the discontinuities
/// of g on (0, 1).
fn cycle_variance(g: &dyn Fn(f64) -> f64, kinks: &[f64], n: usize) -> f64 {
    let mut breaks = vec![-1.0, 0.0, 1.0];
    for &k in kinks {
        breaks.push(k);
        breaks.push(k - 1.0);
    }
    let f = |z: f64| g(frac(z));
    let outer = |x: f64| {
        let mut b = breaks.clone();
        b.push(x);
        b.sort_by(f64::total_cmp);
        b.dedup();
        gauss3(&b, n, &|y| green(x, y) * f(y))
    };
    let mut b = breaks.clone();
    b.sort_by(f64::total_cmp);
    b.dedup();
    let mean = gauss3(&b, n, &|y| green(0.0, y) * f(y));
    let second = 2.0 * gauss3(&b, n, &|x| green(0.0, x) * f(x) * outer(x));
    second - mean * mean
}

#[test]
fn green_quadrature_reproduces_the_exit_moments() {
    let one = |_: f64| 1.0;
    // Var τ = E[τ²] − 1
    let var_tau = cycle_variance(&one, &[], 200);
    assert!((var_tau + 1.0 - 5.0 / 3.0).abs() < 1e-9, "{var_tau}");
}

#[test]
fn linear_response_oracle_values() {
    let var_zh = cycle_variance(&|y| 2.0 * y - 1.0, &[], 200);
    assert!((var_zh - 1.0 / 45.0).abs() < 1e-9, "{var_zh}");
    let rho_11 = cycle_variance(&|y| if y <= 0.5 { 0.5 } else { -0.5 }, &[0.5], 200);
    assert!((rho_11 - 1.0 / 48.0).abs() < 1e-9, "{rho_11}");
    // ĥ⁻¹(1): Z_e(1) + c Z^h with c = 1/h'(1/2) = 1/2
    let inverse = cycle_variance(&|y| if y <= 0.5 { 1.0 } else { 0.0 } + y - 1.0, &[0.5], 200);
    assert!((inverse - 1.0 / 180.0).abs() < 1e-9, "{inverse}");
    let cubic = cycle_variance(&|y| 4.0 * y * y * y - 1.0, &[], 200);
    assert!((cubic - 19.0 / 225.0).abs() < 1e-9, "{cubic}");
}

fn price_recovery_oracle() -> f64 {
    // ∫₀¹ Var Z_e(h(v)) dv with Z_e(h(v)) = ∫ (1{Y ≤ v} − v)
    let m = 40;
    (0..m)
        .map(|i| {
            let v = (i as f64 + 0.5) / m as f64;
            cycle_variance(&|y| if y <= v { 1.0 - v } else { -v }, &[v], 60)
        })
        .sum::<f64>()
        / m as f64
}

#[test]
fn price_recovery_oracle_value() {
    let c = price_recovery_oracle();
    assert!((c - 1.0 / 90.0).abs() < 2e-5, "{c}");
}

#[test]
fn cycle_statistics_match_quadrature() {
    let h = ResponseFunction::linear();
    let grid: Vec<f64> = (0..32).map(|i| i as f64 / 16.0).collect();
    let s = cycle_statistics(1.0, &h, &grid, 20_000, 2.5e-4, 11).unwrap();
    assert!(s.var_zh.within(1.0 / 45.0, 4.0), "{:?}", s.var_zh);
    assert!(s.mean_tau1.within(1.0, 4.0), "{:?}", s.mean_tau1);
    assert!(s.mean_tau1_sq.within(5.0 / 3.0, 4.0), "{:?}", s.mean_tau1_sq);
    assert!(s.ergodic_y.within(0.5, 4.0), "{:?}", s.ergodic_y);
    assert!(s.ergodic_h.within(1.0, 4.0), "{:?}", s.ergodic_h);
    assert!(s.tau1_lag1_autocorrelation.abs() < 4.0 / (20_000f64).sqrt());
    for e in &s.mean_ze {
        assert!(e.within(0.0, 4.5), "{e:?}");
    }
    let i = grid.iter().position(|&t| (t - 1.0).abs() < 1e-12).unwrap();
    let rho = s.rho_at(i, i);
    assert!((rho - 1.0 / 48.0).abs() <= 4.0 * s.rho_se_at(i, i), "{rho}");

    let surface = RhoSurface::new(&s, &h).unwrap();
    let inv = surface.inverse_variance(&h, 1.0).unwrap();
    assert!((inv / (1.0 / 180.0) - 1.0).abs() < 0.1, "{inv}");
    let cor = surface.corollary_variance(&h);
    assert!((cor / (1.0 / 90.0) - 1.0).abs() < 0.1, "{cor}");
}

#[test]
fn halving_the_step_leaves_the_exit_law_unchanged() {
    let coarse = hitting_moments(&exit_times(1.0, 2e-3, 50_000, 3).unwrap());
    let fine = hitting_moments(&exit_times(1.0, 1e-3, 50_000, 4).unwrap());
    let z = |a: f64, sa: f64, b: f64, sb: f64| (a - b) / (sa * sa + sb * sb).sqrt();
    assert!(z(coarse.mean.value, coarse.mean.se, fine.mean.value, fine.mean.se).abs() < 4.0);
    assert!(z(coarse.mean_sq.value, coarse.mean_sq.se, fine.mean_sq.value, fine.mean_sq.se).abs() < 4.0);
}

#[test]
fn exit_time_scales_with_sigma() {
    let m = hitting_moments(&exit_times(2.0, 1e-3, 40_000, 9).unwrap());
    assert!(m.mean.within(0.25, 4.0), "{:?}", m.mean);
    assert!(m.mean_sq.within(5.0 / 48.0, 4.0), "{:?}", m.mean_sq);
}

#[test]
fn bridge_first_passage_reference_values() {
    // conditional mean first-passage fraction of a unit-time bridge, by
    // independent numerical integration
    let s = CycleSampler::new(1.0, 1.0).unwrap();
    for (a, c, expected) in
        [(0.3, 0.5, 0.219_394_107), (1.0, 0.1, 0.622_743_655), (0.05, 2.0, 0.020_681_882), (0.5, 0.5, 0.327_839_771)]
    {
        let got = s.bridge_exit_fraction(a, c);
        assert!((got - expected).abs() < 1e-5, "a={a} c={c}: {got}");
    }
}

#[test]
fn bridge_crossing_probability_closed_form() {
    assert!((bridge_crossing_probability(0.5, 0.25, 1.0) - (-0.25f64).exp()).abs() < 1e-15);
    assert!(bridge_crossing_probability(10.0, 10.0, 1.0) < 1e-80);
    assert_eq!(bridge_crossing_probability(0.0, 1.0, 1.0), 1.0);
}
