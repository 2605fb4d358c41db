use cox_orderflow::model::{
    ergodic_average, path_value, simulate, simulate_binned, simulate_events, ModelParams, ResponseFunction,
};

fn params(mu: f64, horizon: f64, bins: usize, seed: u64) -> ModelParams {
    ModelParams { sigma: 1.0, mu, horizon, bins, p0: 50, seed }
}

#[test]
fn acceptance_rate_given_y_matches_the_mean_of_h() {
    // candidates arrive at rate μ sup h = 2μ and are kept with probability h(y)/2 = y
    let h = ResponseFunction::linear();
    let p = params(2000.0, 20.0, 10, 3);
    let cells = 10;
    let mut kept = vec![0f64; cells];
    let mut seen = vec![0f64; cells];
    for rep in 0..4 {
        let rec = simulate(&p, &h, rep).unwrap();
        let n = rec.skeleton_times.len();
        // the first and last skeleton points are the horizon ends, not candidates
        for i in 1..n - 1 {
            let c = ((rec.y_values[i] * cells as f64) as usize).min(cells - 1);
            seen[c] += 1.0;
            kept[c] += rec.accepted[i] as u8 as f64;
        }
    }
    for c in 0..cells {
        let expected = (c as f64 + 0.5) / cells as f64;
        let rate = kept[c] / seen[c];
        let se = (expected * (1.0 - expected) / seen[c]).sqrt();
        assert!((rate - expected).abs() <= 3.0 * se, "cell {c}: {rate} vs {expected} ± {se}");
    }
}

#[test]
fn constant_response_keeps_every_candidate() {
    let h = ResponseFunction::constant();
    let rec = simulate(&params(500.0, 2.0, 10, 1), &h, 0).unwrap();
    let n = rec.skeleton_times.len();
    assert!(rec.accepted[1..n - 1].iter().all(|&a| a));
    assert_eq!(rec.event_count(), n - 2);
}

#[test]
fn skeleton_spans_the_horizon() {
    let p = params(300.0, 3.0, 10, 8);
    let rec = simulate(&p, &ResponseFunction::cubic(), 2).unwrap();
    assert_eq!(rec.skeleton_times[0], 0.0);
    assert_eq!(*rec.skeleton_times.last().unwrap(), p.horizon);
    assert!(rec.skeleton_times.windows(2).all(|w| w[0] < w[1]));
    let (_, y0) = path_value(&rec, 0.0).unwrap();
    assert_eq!(y0, rec.u0);
    for i in 0..rec.y_values.len() {
        let price = p.p0 as f64 + rec.u0 + p.sigma * rec.w_values[i];
        assert!((rec.y_values[i] - (price - price.floor())).abs() < 1e-9);
    }
    for (t, b) in rec.event_times.iter().zip(&rec.bid_levels) {
        let i = rec.skeleton_times.iter().position(|s| s == t).unwrap();
        let price = p.p0 as f64 + rec.u0 + p.sigma * rec.w_values[i];
        assert_eq!(*b, price.floor() as i64);
    }
    assert!(path_value(&rec, 1.234_567_89).is_err());
}

#[test]
fn same_seed_same_path() {
    let h = ResponseFunction::linear();
    let p = params(1000.0, 5.0, 150, 42);
    assert_eq!(simulate(&p, &h, 7).unwrap(), simulate(&p, &h, 7).unwrap());
    assert_ne!(simulate(&p, &h, 7).unwrap().event_times, simulate(&p, &h, 8).unwrap().event_times);
    let events = simulate_events(&p, &h, 7).unwrap();
    assert_eq!(events.event_times(), simulate(&p, &h, 7).unwrap().event_times.as_slice());
    assert_eq!(simulate_binned(&p, &h, 4, 3).unwrap(), simulate_binned(&p, &h, 4, 3).unwrap());
}

#[test]
fn ergodic_average_of_y_is_one_half() {
    let h = ResponseFunction::linear();
    let p = params(10.0, 400.0, 10, 5);
    let rec = simulate(&p, &h, 0).unwrap();
    let avg = ergodic_average(&rec, |y| y).unwrap();
    assert!((avg - 0.5).abs() < 0.05, "{avg}");
}

fn moments(xs: &[f64]) -> (f64, f64) {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    (m, v)
}

#[test]
fn binned_and_exact_simulators_agree_in_law() {
    let h = ResponseFunction::linear();
    let p = params(50.0, 2.0, 20, 12);
    let reps = 4000u64;
    let mut exact_total = Vec::new();
    let mut exact_first = Vec::new();
    let mut binned_total = Vec::new();
    let mut binned_first = Vec::new();
    for r in 0..reps {
        let s = simulate_events(&p, &h, r).unwrap();
        exact_total.push(s.len() as f64);
        exact_first.push(s.count_until(p.bin_width()) as f64);
        let b = simulate_binned(&p, &h, 50, r).unwrap();
        binned_total.push(b.total_count() as f64);
        binned_first.push(b.counts[0] as f64);
    }
    for (a, b) in [(&exact_total, &binned_total), (&exact_first, &binned_first)] {
        let (ma, va) = moments(a);
        let (mb, vb) = moments(b);
        let n = reps as f64;
        let z_mean = (ma - mb) / ((va + vb) / n).sqrt();
        assert!(z_mean.abs() < 4.0, "means {ma} {mb}");
        // variance of a sample variance is roughly 2σ⁴/n plus kurtosis terms
        let z_var = (va - vb) / (2.0 * (va * va + vb * vb) / n).sqrt();
        assert!(z_var.abs() < 4.5, "variances {va} {vb}");
    }
    let (m, _) = moments(&exact_total);
    assert!((m / (p.mu * p.horizon) - 1.0).abs() < 0.02);
}

#[test]
fn binned_path_bookkeeping() {
    let h = ResponseFunction::cubic();
    let p = params(1e4, 3.0, 300, 2);
    let b = simulate_binned(&p, &h, 8, 0).unwrap();
    assert_eq!(b.bins(), 300);
    assert_eq!(b.counts.len(), 300);
    assert_eq!(b.y_end.len(), 300);
    assert!(b.y_end.iter().all(|y| (0.0..1.0).contains(y)));
    assert!((0.0..1.0).contains(&b.y_start));
    assert_eq!(b.total_count(), b.counts.iter().sum::<u64>());
    let integral: f64 = b.intensity.iter().sum();
    assert!((integral / (p.mu * p.horizon) - 1.0).abs() < 0.5);
    assert!(simulate_binned(&p, &h, 0, 0).is_err());
}
