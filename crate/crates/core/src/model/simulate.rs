use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::{frac, ModelParams, ResponseFunction, ResponseKind};
use crate::error::{Error, Result};
use crate::estimation::EventStream;
use crate::rng::{self, Domain, StreamRng};

/// One point where the Brownian path was sampled exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkeletonPoint {
    pub time: f64,
    pub w: f64,
    pub y: f64,
    pub accepted: bool,
    /// ⌊P_t⌋ at this time.
    pub bid_level: i64,
}

/// Sequential thinning sampler for the Cox order flow.
///
/// Candidates arrive as a homogeneous Poisson process of rate `μ · sup h` on
/// (0, T]. At each candidate the Brownian path is extended by an exact Gaussian
/// increment and the candidate is kept with probability `h(Y_t) / sup h`. The
/// iterator yields the initial point t = 0, every candidate, and a final
/// non-candidate point at t = T.
pub struct ThinningSampler<'a> {
    h: &'a ResponseFunction,
    rng: StreamRng,
    sigma: f64,
    horizon: f64,
    candidate_rate: f64,
    base_price: f64,
    u0: f64,
    time: f64,
    w: f64,
    started: bool,
    done: bool,
}

impl<'a> ThinningSampler<'a> {
    /// Sampler for replicate `replicate`, drawing from stream `(params.seed, replicate)`.
    pub fn new(params: &ModelParams, h: &'a ResponseFunction, replicate: u64) -> Result<Self> {
        params.validate()?;
        let mut rng = rng::stream(params.seed, Domain::Path, replicate);
        let u0: f64 = rng.random();
        Ok(ThinningSampler {
            h,
            rng,
            sigma: params.sigma,
            horizon: params.horizon,
            candidate_rate: params.mu * h.sup_value(),
            base_price: params.p0 as f64 + u0,
            u0,
            time: 0.0,
            w: 0.0,
            started: false,
            done: false,
        })
    }

    /// Uniform fractional offset of the initial price.
    pub fn u0(&self) -> f64 {
        self.u0
    }

    fn point(&self, accepted: bool) -> SkeletonPoint {
        let price = self.base_price + self.sigma * self.w;
        let bid = price.floor();
        SkeletonPoint { time: self.time, w: self.w, y: frac(price), accepted, bid_level: bid as i64 }
    }

    fn advance(&mut self, to: f64) {
        let dt = to - self.time;
        let z: f64 = StandardNormal.sample(&mut self.rng);
        self.w += dt.sqrt() * z;
        self.time = to;
    }
}

impl Iterator for ThinningSampler<'_> {
    type Item = SkeletonPoint;

    fn next(&mut self) -> Option<SkeletonPoint> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(self.point(false));
        }
        let gap: f64 = Exp1.sample(&mut self.rng);
        let candidate = self.time + gap / self.candidate_rate;
        if candidate > self.horizon {
            self.done = true;
            if self.time == self.horizon {
                return None;
            }
            self.advance(self.horizon);
            return Some(self.point(false));
        }
        self.advance(candidate);
        let mut p = self.point(false);
        let u: f64 = self.rng.random();
        p.accepted = u * self.h.sup_value() < self.h.eval(p.y);
        Some(p)
    }
}

/// The simulated truth of one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRecord {
    pub params: ModelParams,
    pub response: ResponseKind,
    pub u0: f64,
    pub skeleton_times: Vec<f64>,
    pub w_values: Vec<f64>,
    pub y_values: Vec<f64>,
    pub accepted: Vec<bool>,
    pub event_times: Vec<f64>,
    /// Best bid ⌊P_t⌋ at each event time.
    pub bid_levels: Vec<i64>,
}

impl SimulationRecord {
    pub fn event_count(&self) -> usize {
        self.event_times.len()
    }

    /// N_t, the number of events in [0, t].
    pub fn count_until(&self, t: f64) -> usize {
        self.event_times.partition_point(|&s| s <= t)
    }

    pub fn to_event_stream(&self) -> EventStream {
        EventStream::from_parts_unchecked(self.event_times.clone(), self.params.horizon, Some(self.bid_levels.clone()))
    }
}

/// Exact simulation of `(W, Y, N)` for replicate `replicate` of `params`.
pub fn simulate(params: &ModelParams, h: &ResponseFunction, replicate: u64) -> Result<SimulationRecord> {
    let sampler = ThinningSampler::new(params, h, replicate)?;
    let u0 = sampler.u0();
    let mut rec = SimulationRecord {
        params: *params,
        response: h.kind(),
        u0,
        skeleton_times: Vec::new(),
        w_values: Vec::new(),
        y_values: Vec::new(),
        accepted: Vec::new(),
        event_times: Vec::new(),
        bid_levels: Vec::new(),
    };
    for p in sampler {
        rec.skeleton_times.push(p.time);
        rec.w_values.push(p.w);
        rec.y_values.push(p.y);
        rec.accepted.push(p.accepted);
        if p.accepted {
            rec.event_times.push(p.time);
            rec.bid_levels.push(p.bid_level);
        }
    }
    Ok(rec)
}

/// Same law as [`simulate`] (and the same draws), keeping only the observed flow.
pub fn simulate_events(params: &ModelParams, h: &ResponseFunction, replicate: u64) -> Result<EventStream> {
    let mut times = Vec::new();
    let mut bids = Vec::new();
    for p in ThinningSampler::new(params, h, replicate)?.filter(|p| p.accepted) {
        times.push(p.time);
        bids.push(p.bid_level);
    }
    Ok(EventStream::from_parts_unchecked(times, params.horizon, Some(bids)))
}

/// Exact `(W_t, Y_t)` at a skeleton time; there is no interpolation between points.
pub fn path_value(record: &SimulationRecord, t: f64) -> Result<(f64, f64)> {
    let i = record.skeleton_times.partition_point(|&s| s < t);
    match record.skeleton_times.get(i) {
        Some(&s) if s == t => Ok((record.w_values[i], record.y_values[i])),
        _ => Err(Error::NotInSkeleton(t)),
    }
}

/// Trapezoid approximation of (1/T) ∫₀ᵀ f(Y_s) ds over the skeleton.
pub fn ergodic_average(record: &SimulationRecord, f: impl Fn(f64) -> f64) -> Result<f64> {
    let n = record.skeleton_times.len();
    if n < 2 {
        return Err(Error::Empty("skeleton needs at least two points"));
    }
    let mut weighted = 0.0;
    let mut total = 0.0;
    let mut prev = f(record.y_values[0]);
    for i in 1..n {
        let dt = record.skeleton_times[i] - record.skeleton_times[i - 1];
        let cur = f(record.y_values[i]);
        weighted += 0.5 * dt * (prev + cur);
        total += dt;
        prev = cur;
    }
    Ok(weighted / total)
}
