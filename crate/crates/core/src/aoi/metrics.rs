use std::collections::BTreeMap;

use super::trace::segment_area;
use super::{AoiError, AoiTrace, Duration, Timestamp};

/// Running integrals for one follower.
#[derive(Debug, Clone, PartialEq)]
pub struct FollowerMetrics {
    pub id: u16,
    registered_at: Timestamp,
    last_t: Timestamp,
    age_at_last: f64,
    weight: f64,
    /// ∫ A dt in s².
    pub age_integral: f64,
    /// ∫ w A dt in s², with w piecewise constant.
    pub weighted_integral: f64,
    pub deliveries: u64,
    pub delivered_bytes: u64,
    trace: AoiTrace,
}

impl FollowerMetrics {
    fn advance(&mut self, now: Timestamp) {
        if now <= self.last_t {
            return;
        }
        let dt = (now - self.last_t).as_secs_f64();
        let area = segment_area(self.age_at_last, dt);
        self.age_integral += area;
        self.weighted_integral += self.weight * area;
        self.age_at_last += dt;
        self.last_t = now;
    }

    /// Time covered since registration, in seconds.
    pub fn observed_secs(&self) -> f64 {
        (self.last_t - self.registered_at).as_secs_f64()
    }

    pub fn mean_age(&self) -> Option<f64> {
        let t = self.observed_secs();
        (t > 0.0).then(|| self.age_integral / t)
    }

    pub fn trace(&self) -> &AoiTrace {
        &self.trace
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }
}

/// Empirical weighted-age cost and the per-follower integrals behind it.
///
/// Single owner; callers feed deliveries and weight changes in time order.
#[derive(Debug, Clone, Default)]
pub struct MetricsAccumulator {
    followers: BTreeMap<u16, FollowerMetrics>,
    start: Option<Timestamp>,
    now: Timestamp,
}

impl MetricsAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, id: u16, at: Timestamp, weight: f64) {
        self.start = Some(self.start.map_or(at, |s| s.min(at)));
        self.now = self.now.max(at);
        self.followers.insert(
            id,
            FollowerMetrics {
                id,
                registered_at: at,
                last_t: at,
                age_at_last: 0.0,
                weight,
                age_integral: 0.0,
                weighted_integral: 0.0,
                deliveries: 0,
                delivered_bytes: 0,
                trace: AoiTrace::start(at, 0.0),
            },
        );
    }

    fn entry(&mut self, id: u16, now: Timestamp) -> Result<&mut FollowerMetrics, AoiError> {
        let last = self.now;
        if now < last {
            return Err(AoiError::NonMonotoneTrace { at: now, last });
        }
        self.now = now;
        self.followers.get_mut(&id).ok_or(AoiError::UnknownFollower(id))
    }

    /// Records a completed update; `age_after` is the age right after delivery.
    pub fn record_delivery(
        &mut self,
        id: u16,
        now: Timestamp,
        age_after: Duration,
        bytes: u64,
    ) -> Result<(), AoiError> {
        let f = self.entry(id, now)?;
        f.advance(now);
        let age = age_after.as_secs_f64();
        f.trace.push(now, age)?;
        f.age_at_last = age.min(f.age_at_last);
        f.deliveries += 1;
        f.delivered_bytes += bytes;
        Ok(())
    }

    /// Changes the weight from `now` onward.
    pub fn set_weight(&mut self, id: u16, now: Timestamp, weight: f64) -> Result<(), AoiError> {
        let f = self.entry(id, now)?;
        f.advance(now);
        f.weight = weight;
        Ok(())
    }

    /// Integrates every follower up to `now`.
    pub fn advance(&mut self, now: Timestamp) -> Result<(), AoiError> {
        if now < self.now {
            return Err(AoiError::NonMonotoneTrace { at: now, last: self.now });
        }
        self.now = now;
        for f in self.followers.values_mut() {
            f.advance(now);
        }
        Ok(())
    }

    /// Advances to `now` and closes every trace there.
    pub fn finish(&mut self, now: Timestamp) -> Result<(), AoiError> {
        self.advance(now)?;
        for f in self.followers.values_mut() {
            f.trace.close(now)?;
        }
        Ok(())
    }

    pub fn elapsed_secs(&self) -> f64 {
        self.start.map_or(0.0, |s| (self.now - s).as_secs_f64())
    }

    pub fn follower(&self, id: u16) -> Option<&FollowerMetrics> {
        self.followers.get(&id)
    }

    pub fn followers(&self) -> impl Iterator<Item = &FollowerMetrics> {
        self.followers.values()
    }

    /// (1/T) Σ ∫ w_i A_i dt.
    pub fn weighted_cost(&self) -> Result<f64, AoiError> {
        let t = self.elapsed_secs();
        if t <= 0.0 {
            return Err(AoiError::ZeroElapsed);
        }
        Ok(self.followers.values().map(|f| f.weighted_integral).sum::<f64>() / t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(secs: f64) -> Timestamp {
        Timestamp::from_secs_f64(secs)
    }

    /// Deliveries every 2 s with 0.5 s delay over 100 s, starting steady.
    fn feed_periodic(acc: &mut MetricsAccumulator, id: u16) {
        for k in 1..=50 {
            let t = ts(2.0 * k as f64);
            acc.record_delivery(id, t, Duration::from_millis(500), 10).unwrap();
        }
    }

    fn steady_acc(ids: &[u16]) -> MetricsAccumulator {
        let mut acc = MetricsAccumulator::new();
        for &id in ids {
            acc.register(id, ts(0.0), 1.0);
            // start in steady state: age 0.5 at t = 0
            acc.followers.get_mut(&id).unwrap().age_at_last = 0.5;
        }
        acc
    }

    #[test]
    fn unit_weight_cost_is_mean_age() {
        let mut acc = steady_acc(&[1]);
        feed_periodic(&mut acc, 1);
        acc.finish(ts(100.0)).unwrap();
        assert!((acc.weighted_cost().unwrap() - 1.5).abs() < 1e-9);
        assert!((acc.follower(1).unwrap().mean_age().unwrap() - 1.5).abs() < 1e-9);
    }

    #[test]
    fn cost_is_additive_over_followers() {
        let mut one = steady_acc(&[1]);
        let mut two = steady_acc(&[1, 2]);
        for k in 1..=50 {
            let t = ts(2.0 * k as f64);
            one.record_delivery(1, t, Duration::from_millis(500), 10).unwrap();
            two.record_delivery(1, t, Duration::from_millis(500), 10).unwrap();
            two.record_delivery(2, t, Duration::from_millis(500), 10).unwrap();
        }
        one.finish(ts(100.0)).unwrap();
        two.finish(ts(100.0)).unwrap();
        let (c1, c2) = (one.weighted_cost().unwrap(), two.weighted_cost().unwrap());
        assert!((c2 - 2.0 * c1).abs() < 1e-9);
    }

    /// Stepwise oracle: integrate w(t) A(t) on a fine grid from the
    /// closed-form sawtooth.
    fn stepwise_oracle(switch_at: f64) -> f64 {
        let dt = 1e-4;
        let mut sum = 0.0;
        let mut t = dt / 2.0;
        while t < 100.0 {
            let age = 0.5 + (t % 2.0);
            let w = if t < switch_at { 1.0 } else { 2.0 };
            sum += w * age * dt;
            t += dt;
        }
        2.0 * sum / 100.0
    }

    #[test]
    fn weight_change_mid_run() {
        let mut base = steady_acc(&[1, 2]);
        let mut acc = steady_acc(&[1, 2]);
        for k in 1..=50 {
            let t = ts(2.0 * k as f64);
            if k == 25 {
                // doubled at t = 49 s, between deliveries
                acc.set_weight(1, ts(49.0), 2.0).unwrap();
                acc.set_weight(2, ts(49.0), 2.0).unwrap();
            }
            for id in [1, 2] {
                base.record_delivery(id, t, Duration::from_millis(500), 0).unwrap();
                acc.record_delivery(id, t, Duration::from_millis(500), 0).unwrap();
            }
        }
        base.finish(ts(100.0)).unwrap();
        acc.finish(ts(100.0)).unwrap();
        let unweighted = base.weighted_cost().unwrap();
        let cost = acc.weighted_cost().unwrap();
        assert!(cost > unweighted && cost < 2.0 * unweighted);
        let oracle = stepwise_oracle(49.0);
        assert!((cost - oracle).abs() / oracle < 1e-5, "{cost} vs {oracle}");
    }

    #[test]
    fn zero_elapsed_is_rejected() {
        let mut acc = MetricsAccumulator::new();
        acc.register(1, ts(3.0), 1.0);
        assert!(matches!(acc.weighted_cost(), Err(AoiError::ZeroElapsed)));
    }

    #[test]
    fn empty_run_mean_is_half_duration() {
        let mut acc = MetricsAccumulator::new();
        acc.register(1, ts(0.0), 1.0);
        acc.finish(ts(8.0)).unwrap();
        assert!((acc.follower(1).unwrap().mean_age().unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn time_going_backwards_is_rejected() {
        let mut acc = MetricsAccumulator::new();
        acc.register(1, ts(0.0), 1.0);
        acc.advance(ts(5.0)).unwrap();
        assert!(acc.record_delivery(1, ts(4.0), Duration::ZERO, 0).is_err());
    }
}
