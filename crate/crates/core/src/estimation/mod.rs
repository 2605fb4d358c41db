//! Non-parametric estimators computed from the observed order flow alone.
//!
//! Bins are the half-open windows `((j−1)T/k, jT/k]`, so every event in (0, T]
//! lands in exactly one bin. The bin statistics `θ̂_j = k·count_j / N_T` always
//! average to one; ranking them gives the step estimator `ĥ`, and their empirical
//! distribution function is `ĥ⁻¹`.

pub mod io;
pub mod oracle;
mod regime;

pub use regime::{check_regime, RegimeReport, REFERENCE_EPSILON, REFERENCE_P};

use crate::error::{Error, Result};

/// Observed limit-order arrival times on (0, T].
#[derive(Debug, Clone, PartialEq)]
pub struct EventStream {
    event_times: Vec<f64>,
    horizon: f64,
    bid_levels: Option<Vec<i64>>,
}

impl EventStream {
    pub fn new(event_times: Vec<f64>, horizon: f64, bid_levels: Option<Vec<i64>>) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidParams(format!("horizon must be positive, got {horizon}")));
        }
        if let Some(&bad) = event_times.iter().find(|&&t| !(t > 0.0 && t <= horizon)) {
            return Err(Error::Domain(format!("event time {bad} outside (0, {horizon}]")));
        }
        if event_times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("event times must be strictly increasing".into()));
        }
        if let Some(b) = &bid_levels {
            if b.len() != event_times.len() {
                return Err(Error::InvalidParams(format!("{} bid levels for {} events", b.len(), event_times.len())));
            }
        }
        Ok(Self::from_parts_unchecked(event_times, horizon, bid_levels))
    }

    pub(crate) fn from_parts_unchecked(event_times: Vec<f64>, horizon: f64, bid_levels: Option<Vec<i64>>) -> Self {
        EventStream { event_times, horizon, bid_levels }
    }

    pub fn event_times(&self) -> &[f64] {
        &self.event_times
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn bid_levels(&self) -> Option<&[i64]> {
        self.bid_levels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.event_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.event_times.is_empty()
    }

    /// N_t
    pub fn count_until(&self, t: f64) -> usize {
        self.event_times.partition_point(|&s| s <= t)
    }

    /// Number of events in the half-open window (a, b].
    pub fn count_between(&self, a: f64, b: f64) -> usize {
        self.count_until(b).saturating_sub(self.count_until(a))
    }

    /// Bid level at an event time, if levels were observed and `t` is an event.
    pub fn bid_at(&self, t: f64) -> Option<i64> {
        let levels = self.bid_levels.as_ref()?;
        let i = self.event_times.partition_point(|&s| s < t);
        (self.event_times.get(i) == Some(&t)).then(|| levels[i])
    }
}

/// Right end `jT/k` of bin j (1-based); `j = k` is exactly T.
pub fn bin_boundary(horizon: f64, bins: usize, j: usize) -> f64 {
    if j >= bins {
        horizon
    } else {
        horizon * j as f64 / bins as f64
    }
}

/// μ̂_T = N_T / T. Zero for an empty stream; downstream estimators reject that case.
pub fn estimate_mu(stream: &EventStream) -> f64 {
    stream.len() as f64 / stream.horizon
}

/// Event counts in the k half-open bins.
pub fn bin_event_counts(stream: &EventStream, bins: usize) -> Result<Vec<u64>> {
    if bins == 0 {
        return Err(Error::InvalidParams("bins must be at least 1".into()));
    }
    let mut counts = Vec::with_capacity(bins);
    let mut below = 0;
    for j in 1..=bins {
        let upto = stream.count_until(bin_boundary(stream.horizon, bins, j));
        counts.push((upto - below) as u64);
        below = upto;
    }
    Ok(counts)
}

/// θ̂_j = k · count_j / N_T.
pub fn theta_from_counts(counts: &[u64]) -> Result<Vec<f64>> {
    if counts.is_empty() {
        return Err(Error::InvalidParams("bins must be at least 1".into()));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::CannotNormalize);
    }
    let k = counts.len() as f64;
    let n = total as f64;
    Ok(counts.iter().map(|&c| k * c as f64 / n).collect())
}

/// The bin statistics θ̂_1..θ̂_k of a stream.
pub fn bin_counts(stream: &EventStream, bins: usize) -> Result<Vec<f64>> {
    theta_from_counts(&bin_event_counts(stream, bins)?)
}

fn sorted_copy(theta: &[f64]) -> Vec<f64> {
    let mut s = theta.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

fn check_unit_interval(u: f64) -> Result<()> {
    if (0.0..1.0).contains(&u) {
        Ok(())
    } else {
        Err(Error::Domain(format!("u = {u} is outside [0, 1)")))
    }
}

fn rank_index(u: f64, k: usize) -> usize {
    ((u * k as f64).floor() as usize).min(k - 1)
}

/// ĥ(u) = θ̂_(⌊uk⌋+1), the (⌊uk⌋+1)-th order statistic.
pub fn estimate_h(theta: &[f64], u: f64) -> Result<f64> {
    if theta.is_empty() {
        return Err(Error::Empty("theta"));
    }
    check_unit_interval(u)?;
    Ok(sorted_copy(theta)[rank_index(u, theta.len())])
}

/// ĥ⁻¹(t) = (1/k) #{j : θ̂_j ≤ t}.
pub fn estimate_h_inverse(theta: &[f64], t: f64) -> f64 {
    theta.iter().filter(|&&v| v <= t).count() as f64 / theta.len() as f64
}

/// Windowed intensity estimate k (N_t − N_{t−T/k}) / (μ̂ T) over the trailing window.
pub fn estimate_h_at_time(stream: &EventStream, t: f64, bins: usize) -> Result<f64> {
    if bins == 0 {
        return Err(Error::InvalidParams("bins must be at least 1".into()));
    }
    let window = stream.horizon / bins as f64;
    if t < window {
        return Err(Error::WindowUnderflow { t, window });
    }
    if t > stream.horizon {
        return Err(Error::Domain(format!("t = {t} is beyond the horizon {}", stream.horizon)));
    }
    if stream.is_empty() {
        return Err(Error::CannotNormalize);
    }
    // Align with the bin grid when t is a bin boundary so θ̂_j is reproduced exactly.
    let j = (t / window).round() as usize;
    let lower = if j >= 1 && bin_boundary(stream.horizon, bins, j) == t {
        bin_boundary(stream.horizon, bins, j - 1)
    } else {
        t - window
    };
    let count = stream.count_between(lower, t);
    Ok(bins as f64 * count as f64 / stream.len() as f64)
}

/// μ̂, θ̂ and the two step estimators derived from them.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    pub mu_hat: f64,
    pub horizon: f64,
    pub theta: Vec<f64>,
    pub theta_sorted: Vec<f64>,
}

impl EstimationResult {
    pub fn from_counts(counts: &[u64], horizon: f64) -> Result<Self> {
        let theta = theta_from_counts(counts)?;
        let total: u64 = counts.iter().sum();
        Ok(Self::from_theta(theta, total as f64 / horizon, horizon))
    }

    fn from_theta(theta: Vec<f64>, mu_hat: f64, horizon: f64) -> Self {
        let theta_sorted = sorted_copy(&theta);
        EstimationResult { mu_hat, horizon, theta, theta_sorted }
    }

    pub fn bins(&self) -> usize {
        self.theta.len()
    }

    pub fn h_hat(&self, u: f64) -> Result<f64> {
        check_unit_interval(u)?;
        Ok(self.theta_sorted[rank_index(u, self.bins())])
    }

    pub fn h_inv_hat(&self, t: f64) -> f64 {
        self.theta_sorted.partition_point(|&v| v <= t) as f64 / self.bins() as f64
    }

    /// `(j/k, ĥ(j/k))` for j = 0..k, the left ends of the steps of ĥ.
    pub fn h_hat_steps(&self) -> Vec<(f64, f64)> {
        let k = self.bins() as f64;
        self.theta_sorted.iter().enumerate().map(|(j, &v)| (j as f64 / k, v)).collect()
    }

    /// `(t, ĥ⁻¹(t))` at every distinct jump point of ĥ⁻¹.
    pub fn h_inv_steps(&self) -> Vec<(f64, f64)> {
        let k = self.bins() as f64;
        let s = &self.theta_sorted;
        (0..s.len()).filter(|&i| i + 1 == s.len() || s[i + 1] != s[i]).map(|i| (s[i], (i + 1) as f64 / k)).collect()
    }

    /// Ŷ_t = ĥ⁻¹(ĥ(Y_t)) using the trailing window ending at t.
    pub fn estimate_y(&self, stream: &EventStream, t: f64) -> Result<f64> {
        Ok(self.h_inv_hat(estimate_h_at_time(stream, t, self.bins())?))
    }

    /// B_t + Ŷ_t when t is an event time with an observed bid level.
    pub fn estimate_price(&self, stream: &EventStream, t: f64) -> Result<Option<f64>> {
        let y = self.estimate_y(stream, t)?;
        Ok(stream.bid_at(t).map(|b| b as f64 + y))
    }
}

/// Runs the whole pipeline: μ̂, θ̂, ĥ and ĥ⁻¹.
pub fn estimate(stream: &EventStream, bins: usize) -> Result<EstimationResult> {
    let theta = bin_counts(stream, bins)?;
    Ok(EstimationResult::from_theta(theta, estimate_mu(stream), stream.horizon))
}

/// Ŷ_t for a standalone estimate.
pub fn estimate_y(result: &EstimationResult, stream: &EventStream, t: f64) -> Result<f64> {
    result.estimate_y(stream, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(times: &[f64], horizon: f64) -> EventStream {
        EventStream::new(times.to_vec(), horizon, None).unwrap()
    }

    #[test]
    fn mu_hat_examples() {
        let times: Vec<f64> = (1..=500).map(|i| i as f64 / 100.0).collect();
        assert_eq!(estimate_mu(&stream(&times, 5.0)), 100.0);
        assert_eq!(estimate_mu(&stream(&[], 5.0)), 0.0);
    }

    #[test]
    fn theta_examples() {
        // 3 events in (0, 1], 7 in (1, 2]
        let mut times: Vec<f64> = (1..=3).map(|i| i as f64 * 0.25).collect();
        times.extend((1..=7).map(|i| 1.0 + i as f64 * 0.125));
        let theta = bin_counts(&stream(&times, 2.0), 2).unwrap();
        assert_eq!(theta, vec![0.6, 1.4]);
        let theta = bin_counts(&stream(&[0.1, 0.2], 2.0), 4).unwrap();
        assert_eq!(theta, vec![4.0, 0.0, 0.0, 0.0]);
        assert!(matches!(bin_counts(&stream(&[], 2.0), 4), Err(Error::CannotNormalize)));
    }

    #[test]
    fn boundary_events_fall_in_the_left_bin() {
        let s = stream(&[1.0, 2.0], 2.0);
        assert_eq!(bin_event_counts(&s, 2).unwrap(), vec![1, 1]);
    }

    #[test]
    fn h_and_inverse_examples() {
        let theta = [1.4, 0.6];
        assert_eq!(estimate_h(&theta, 0.3).unwrap(), 0.6);
        assert_eq!(estimate_h(&theta, 0.6).unwrap(), 1.4);
        assert!(estimate_h(&theta, 1.0).is_err());
        assert!(estimate_h(&theta, -0.1).is_err());
        assert!(estimate_h(&[], 0.1).is_err());
        assert_eq!(estimate_h_inverse(&theta, 1.0), 0.5);
        assert_eq!(estimate_h_inverse(&theta, 1.4), 1.0);
        assert_eq!(estimate_h_inverse(&theta, 0.5), 0.0);
        let ones = [1.0; 5];
        for u in [0.0, 0.3, 0.99] {
            assert_eq!(estimate_h(&ones, u).unwrap(), 1.0);
        }
    }

    #[test]
    fn windowed_estimate_matches_bins_at_boundaries() {
        let times: Vec<f64> = (1..200).map(|i| (i as f64 * 0.7346).fract() * 3.0).collect::<Vec<_>>();
        let mut times = times;
        times.sort_by(f64::total_cmp);
        times.dedup();
        times.retain(|&t| t > 0.0);
        let s = stream(&times, 3.0);
        let k = 7;
        let theta = bin_counts(&s, k).unwrap();
        for j in 1..=k {
            let t = bin_boundary(3.0, k, j);
            assert_eq!(estimate_h_at_time(&s, t, k).unwrap(), theta[j - 1]);
        }
        assert!(matches!(estimate_h_at_time(&s, 0.1, k), Err(Error::WindowUnderflow { .. })));
        let sparse = stream(&[2.9], 3.0);
        assert_eq!(estimate_h_at_time(&sparse, 1.0, 3).unwrap(), 0.0);
    }

    #[test]
    fn y_hat_saturates() {
        let s = stream(&[0.9, 1.1, 2.5], 3.0);
        let est = estimate(&s, 3).unwrap();
        assert_eq!(est.theta, vec![1.0, 1.0, 1.0]);
        // (1.4, 2.4] is empty: below every θ̂
        assert_eq!(est.estimate_y(&s, 2.4).unwrap(), 0.0);
        // (0.5, 1.5] holds two events: above every θ̂
        assert_eq!(est.estimate_y(&s, 1.5).unwrap(), 1.0);
        let s = stream(&[0.5, 1.2, 1.4, 1.6, 1.8, 2.5], 3.0);
        let est = estimate(&s, 3).unwrap();
        assert_eq!(est.theta, vec![0.5, 2.0, 0.5]);
        assert_eq!(est.estimate_y(&s, 1.2).unwrap(), 2.0 / 3.0);
    }

    #[test]
    fn step_tables() {
        let s = stream(&[0.5, 1.2, 1.4, 1.6, 1.8, 2.5], 3.0);
        let est = estimate(&s, 3).unwrap();
        assert_eq!(est.h_hat_steps(), vec![(0.0, 0.5), (1.0 / 3.0, 0.5), (2.0 / 3.0, 2.0)]);
        assert_eq!(est.h_inv_steps(), vec![(0.5, 2.0 / 3.0), (2.0, 1.0)]);
    }

    #[test]
    fn price_estimate_needs_bid_levels() {
        let s = EventStream::new(vec![1.0, 2.0, 3.0], 3.0, Some(vec![100, 101, 101])).unwrap();
        let est = estimate(&s, 3).unwrap();
        let p = est.estimate_price(&s, 2.0).unwrap().unwrap();
        assert_eq!(p, 101.0 + est.estimate_y(&s, 2.0).unwrap());
        assert_eq!(est.estimate_price(&s, 2.5).unwrap(), None);
    }

    #[test]
    fn stream_validation() {
        assert!(EventStream::new(vec![0.0], 1.0, None).is_err());
        assert!(EventStream::new(vec![0.5, 0.5], 1.0, None).is_err());
        assert!(EventStream::new(vec![1.5], 1.0, None).is_err());
        assert!(EventStream::new(vec![0.5], 1.0, Some(vec![])).is_err());
        assert!(EventStream::new(vec![], 0.0, None).is_err());
    }
}
