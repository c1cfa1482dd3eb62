use crate::aoi::{quantile_of_samples, AoiError, MetricsAccumulator, Timestamp, DEFAULT_PERCENTILE_STEP};
use crate::leader::Leader;
use crate::scheduler::PolicyKind;

use super::world::TrackingWorld;
use super::System;

/// Metrics for one follower, or for the whole network when `id` is `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct FollowerReport {
    pub id: Option<u16>,
    pub mean_aoi_s: f64,
    pub p95_aoi_s: f64,
    /// Delivered payload bytes per second.
    pub throughput_bps: f64,
    pub deliveries: u64,
    pub delivered_bytes: u64,
    pub generated: u64,
    pub tracking_error_m: Option<f64>,
    pub outside_fov: Option<f64>,
}

/// Outcome of one simulated run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub system: System,
    pub policy: PolicyKind,
    pub n: u16,
    pub rate_fps: f64,
    pub seed: u64,
    pub duration_s: f64,
    pub followers: Vec<FollowerReport>,
    pub aggregate: FollowerReport,
    pub weighted_cost: f64,
    /// Polls sent (polling) or transmission attempts (random access).
    pub attempts: u64,
    pub timeouts: u64,
    pub collisions: u64,
}

impl MetricsReport {
    /// Short label for the scheme: the policy for polling runs, `baseline`
    /// for random access.
    pub fn label(&self) -> &'static str {
        match self.system {
            System::Polling => self.policy.as_str(),
            System::RandomAccess => "baseline",
        }
    }

    pub fn follower(&self, id: u16) -> Option<&FollowerReport> {
        self.followers.iter().find(|f| f.id == Some(id))
    }

    /// Closes a live leader's metrics at `stop`. Generation counts are not
    /// visible to the leader and are reported as zero.
    pub fn from_leader(leader: &mut Leader, stop: Timestamp, rate_fps: f64) -> Result<Self, AoiError> {
        let counters = leader.counters();
        let policy = leader.config().policy;
        let n = leader.followers().count() as u16;
        let seed = leader.config().seed;
        let metrics = leader.finish(stop)?;
        let info = RunInfo {
            system: System::Polling,
            policy,
            n,
            rate_fps,
            seed,
            attempts: counters.polls,
            timeouts: counters.timeouts,
            collisions: 0,
        };
        build_report(info, metrics, &[], None)
    }
}

pub(crate) struct RunInfo {
    pub system: System,
    pub policy: PolicyKind,
    pub n: u16,
    pub rate_fps: f64,
    pub seed: u64,
    pub attempts: u64,
    pub timeouts: u64,
    pub collisions: u64,
}

/// Builds the report from a finished accumulator. The aggregate mean is the
/// total age integral over the total observed time; the aggregate p95 pools
/// every follower's grid samples.
pub(crate) fn build_report(
    info: RunInfo,
    metrics: &MetricsAccumulator,
    generated: &[u64],
    world: Option<&TrackingWorld>,
) -> Result<MetricsReport, AoiError> {
    let elapsed = metrics.elapsed_secs();
    if elapsed <= 0.0 {
        return Err(AoiError::ZeroElapsed);
    }
    let mut followers = Vec::new();
    let mut pooled = Vec::new();
    let (mut integral, mut observed) = (0.0, 0.0);
    for (k, f) in metrics.followers().enumerate() {
        let mut samples = f.trace().sample_grid(DEFAULT_PERCENTILE_STEP);
        if samples.is_empty() {
            return Err(AoiError::EmptyTrace);
        }
        pooled.extend_from_slice(&samples);
        integral += f.age_integral;
        observed += f.observed_secs();
        followers.push(FollowerReport {
            id: Some(f.id),
            mean_aoi_s: f.mean_age().unwrap_or(0.0),
            p95_aoi_s: quantile_of_samples(&mut samples, 0.95),
            throughput_bps: f.delivered_bytes as f64 / elapsed,
            deliveries: f.deliveries,
            delivered_bytes: f.delivered_bytes,
            generated: generated.get(k).copied().unwrap_or(0),
            tracking_error_m: world.and_then(|w| w.mean_error(k)),
            outside_fov: world.and_then(|w| w.outside_fraction(k)),
        });
    }
    let n = followers.len().max(1) as f64;
    let mean_of = |get: fn(&FollowerReport) -> Option<f64>| -> Option<f64> {
        let vals: Option<Vec<f64>> = followers.iter().map(get).collect();
        vals.map(|v| v.iter().sum::<f64>() / n)
    };
    let delivered_bytes: u64 = followers.iter().map(|f| f.delivered_bytes).sum();
    let aggregate = FollowerReport {
        id: None,
        mean_aoi_s: if observed > 0.0 { integral / observed } else { 0.0 },
        p95_aoi_s: if pooled.is_empty() { 0.0 } else { quantile_of_samples(&mut pooled, 0.95) },
        throughput_bps: delivered_bytes as f64 / elapsed,
        deliveries: followers.iter().map(|f| f.deliveries).sum(),
        delivered_bytes,
        generated: followers.iter().map(|f| f.generated).sum(),
        tracking_error_m: world.and(mean_of(|f| f.tracking_error_m)),
        outside_fov: world.and(mean_of(|f| f.outside_fov)),
    };
    Ok(MetricsReport {
        system: info.system,
        policy: info.policy,
        n: info.n,
        rate_fps: info.rate_fps,
        seed: info.seed,
        duration_s: elapsed,
        followers,
        aggregate,
        weighted_cost: metrics.weighted_cost()?,
        attempts: info.attempts,
        timeouts: info.timeouts,
        collisions: info.collisions,
    })
}
