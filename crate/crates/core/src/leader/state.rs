use std::collections::BTreeMap;

use bytes::Bytes;

use crate::aoi::{AgeRecord, AoiError, Duration, MetricsAccumulator, Timestamp};
use crate::scheduler::{
    FollowerView, LinkEstimator, Policy, PolicyKind, SchedulerError, SchedulerView, WeightEstimator, DEFAULT_ALPHA,
    DEFAULT_P_FLOOR, DEFAULT_WINDOW,
};
use crate::wire::{Ack, ControlEntry, Fragment, PollPacket, Waypoint};

use super::reassembly::{Insert, Reassembly};
use super::LeaderError;

#[derive(Debug, Clone, PartialEq)]
pub struct LeaderConfig {
    pub timeout: Duration,
    pub window: usize,
    pub p_floor: f64,
    pub policy: PolicyKind,
    /// Seeds the random policy.
    pub seed: u64,
    pub sync_period: Duration,
    pub sync_retries: u32,
    pub alpha: f64,
    pub waypoint_horizon: Duration,
    pub waypoint_count: usize,
    /// Keep polling a follower until its partially received update completes.
    pub sticky_update: bool,
}

impl Default for LeaderConfig {
    fn default() -> Self {
        LeaderConfig {
            timeout: Duration::from_millis(300),
            window: DEFAULT_WINDOW,
            p_floor: DEFAULT_P_FLOOR,
            policy: PolicyKind::Whittle,
            seed: 0,
            sync_period: Duration::from_secs(120),
            sync_retries: 3,
            alpha: DEFAULT_ALPHA,
            waypoint_horizon: Duration::from_secs(1),
            waypoint_count: 5,
            sticky_update: false,
        }
    }
}

impl LeaderConfig {
    pub fn validate(&self) -> Result<(), LeaderError> {
        if self.timeout <= Duration::ZERO {
            return Err(LeaderError::BadConfig("timeout must be positive"));
        }
        if self.sync_period <= Duration::ZERO {
            return Err(LeaderError::BadConfig("sync period must be positive"));
        }
        if self.waypoint_count == 0 || self.waypoint_count > 255 {
            return Err(LeaderError::BadConfig("waypoint count must be in 1..=255"));
        }
        if self.waypoint_horizon <= Duration::ZERO {
            return Err(LeaderError::BadConfig("waypoint horizon must be positive"));
        }
        LinkEstimator::new(self.window, self.p_floor)?;
        WeightEstimator::new(1.0, self.alpha)?;
        Ok(())
    }
}

/// Protocol counters. `polls == responses + timeouts` whenever no poll is
/// outstanding.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LeaderCounters {
    pub polls: u64,
    pub responses: u64,
    pub timeouts: u64,
    pub late_fragments: u64,
    pub duplicate_fragments: u64,
    pub discarded_partials: u64,
    pub invalid_datagrams: u64,
    pub protocol_faults: u64,
    pub clock_faults: u64,
    pub syncs: u64,
    pub sync_failures: u64,
    pub deliveries: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FollowerCounters {
    pub polls: u64,
    pub successes: u64,
    pub failures: u64,
    pub no_data: u64,
    pub deliveries: u64,
    pub delivered_bytes: u64,
}

/// Everything the leader tracks about one follower.
#[derive(Debug, Clone)]
pub struct FollowerEntry {
    pub id: u16,
    pub age: AgeRecord,
    pub link: LinkEstimator,
    pub weight: WeightEstimator,
    pub reassembly: Option<Reassembly>,
    /// Follower clock minus leader clock.
    pub clock_offset: Duration,
    pub last_ack: Option<Ack>,
    last_completed: Option<u32>,
    pub eligible: bool,
    /// Latest waypoints, in leader time.
    pub waypoints: Vec<Waypoint>,
    pub counters: FollowerCounters,
}

/// An update whose fragments have all arrived.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletedUpdate {
    pub follower: u16,
    pub update_seq: u32,
    /// Generation time on the leader's clock.
    pub gen_ts: Timestamp,
    pub payload: Bytes,
    pub delivered_at: Timestamp,
    pub age_after: Duration,
}

/// Output of the application for one completed update.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AppOutput {
    /// Replacement waypoints (leader time), if any.
    pub waypoints: Option<Vec<Waypoint>>,
    /// Relative-speed estimate fed to the weight estimator.
    pub relative_speed: Option<f64>,
}

/// Consumer of completed updates.
pub trait Application {
    fn on_update(&mut self, update: &CompletedUpdate) -> AppOutput;
}

/// Application that only counts deliveries.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullApp;

impl Application for NullApp {
    fn on_update(&mut self, _update: &CompletedUpdate) -> AppOutput {
        AppOutput::default()
    }
}

/// Leader state machine, independent of any transport.
#[derive(Debug)]
pub struct Leader {
    config: LeaderConfig,
    followers: BTreeMap<u16, FollowerEntry>,
    policy: Policy,
    poll_seq: u32,
    outstanding: Option<u16>,
    metrics: MetricsAccumulator,
    counters: LeaderCounters,
}

impl Leader {
    pub fn new(config: LeaderConfig) -> Result<Self, LeaderError> {
        config.validate()?;
        Ok(Leader {
            policy: Policy::new(config.policy, config.seed),
            config,
            followers: BTreeMap::new(),
            poll_seq: 0,
            outstanding: None,
            metrics: MetricsAccumulator::new(),
            counters: LeaderCounters::default(),
        })
    }

    pub fn config(&self) -> &LeaderConfig {
        &self.config
    }

    pub fn register(&mut self, id: u16, now: Timestamp) -> Result<(), LeaderError> {
        if self.followers.contains_key(&id) {
            return Err(LeaderError::DuplicateFollower(id));
        }
        let entry = FollowerEntry {
            id,
            age: AgeRecord::new(id, now),
            link: LinkEstimator::new(self.config.window, self.config.p_floor)?,
            weight: WeightEstimator::new(1.0, self.config.alpha)?,
            reassembly: None,
            clock_offset: Duration::ZERO,
            last_ack: None,
            last_completed: None,
            eligible: true,
            waypoints: Vec::new(),
            counters: FollowerCounters::default(),
        };
        self.metrics.register(id, now, entry.weight.weight());
        self.followers.insert(id, entry);
        Ok(())
    }

    pub fn follower(&self, id: u16) -> Option<&FollowerEntry> {
        self.followers.get(&id)
    }

    pub fn followers(&self) -> impl Iterator<Item = &FollowerEntry> {
        self.followers.values()
    }

    fn entry_mut(&mut self, id: u16) -> Result<&mut FollowerEntry, LeaderError> {
        self.followers.get_mut(&id).ok_or(LeaderError::UnknownFollower(id))
    }

    pub fn counters(&self) -> LeaderCounters {
        self.counters
    }

    pub fn counters_mut(&mut self) -> &mut LeaderCounters {
        &mut self.counters
    }

    pub fn metrics(&self) -> &MetricsAccumulator {
        &self.metrics
    }

    /// The follower polled last, while its response is still awaited.
    pub fn outstanding(&self) -> Option<u16> {
        self.outstanding
    }

    pub fn set_eligible(&mut self, id: u16, eligible: bool) -> Result<(), LeaderError> {
        self.entry_mut(id)?.eligible = eligible;
        Ok(())
    }

    pub fn set_clock_offset(&mut self, id: u16, offset: Duration) -> Result<(), LeaderError> {
        self.entry_mut(id)?.clock_offset = offset;
        Ok(())
    }

    /// Chooses the next target and builds its poll, or `None` when no follower
    /// is eligible.
    pub fn decision_epoch(&mut self, now: Timestamp) -> Result<Option<PollPacket>, LeaderError> {
        if self.outstanding.is_some() {
            return Err(LeaderError::PollOutstanding);
        }
        self.metrics.advance(now)?;
        let sticky = self.config.sticky_update.then(|| {
            self.followers
                .values()
                .find(|f| f.eligible && f.reassembly.is_some())
                .map(|f| f.id)
        });
        let target = match sticky.flatten() {
            Some(id) => id,
            None => {
                let mut views = Vec::with_capacity(self.followers.len());
                for f in self.followers.values() {
                    let mut v = FollowerView::new(
                        f.id,
                        f.age.age_at(now)?.as_secs_f64(),
                        f.link.estimate(),
                        f.weight.weight(),
                    );
                    v.eligible = f.eligible;
                    views.push(v);
                }
                match self.policy.select(&SchedulerView::new(views)) {
                    Ok(id) => id,
                    Err(SchedulerError::NoEligible) => return Ok(None),
                    Err(e) => return Err(e.into()),
                }
            }
        };
        self.poll_seq = self.poll_seq.wrapping_add(1);
        self.outstanding = Some(target);
        self.counters.polls += 1;
        let entry = self.entry_mut(target)?;
        entry.counters.polls += 1;
        let ack = entry.last_ack;
        Ok(Some(PollPacket {
            poll_seq: self.poll_seq,
            target,
            ack,
            control: self.control_blob(),
        }))
    }

    /// Waypoints for every follower, converted to that follower's clock.
    pub fn control_blob(&self) -> Vec<ControlEntry> {
        self.followers
            .values()
            .filter(|f| !f.waypoints.is_empty())
            .map(|f| ControlEntry {
                follower: f.id,
                waypoints: f
                    .waypoints
                    .iter()
                    .map(|w| Waypoint {
                        t: w.t + f.clock_offset,
                        ..*w
                    })
                    .collect(),
            })
            .collect()
    }

    /// Handles a fragment from `from`; returns the update it completes, if any.
    pub fn on_fragment(
        &mut self,
        from: u16,
        frag: &Fragment,
        now: Timestamp,
    ) -> Result<Option<CompletedUpdate>, LeaderError> {
        if !self.followers.contains_key(&from) {
            return Err(LeaderError::UnknownFollower(from));
        }
        if self.outstanding == Some(from) {
            self.outstanding = None;
            self.counters.responses += 1;
        } else {
            self.counters.late_fragments += 1;
        }
        let entry = self.followers.get_mut(&from).expect("checked above");
        entry.link.record(true);
        entry.counters.successes += 1;
        if frag.is_no_data() {
            entry.counters.no_data += 1;
            return Ok(None);
        }
        if entry.last_ack.is_none_or(|a| frag.ack() > a) {
            entry.last_ack = Some(frag.ack());
        }
        if entry.last_completed.is_some_and(|s| frag.update_seq <= s) {
            self.counters.duplicate_fragments += 1;
            return Ok(None);
        }
        let buffer = match &mut entry.reassembly {
            Some(r) if r.update_seq == frag.update_seq && r.frag_count == frag.frag_count => r,
            Some(r) if r.update_seq > frag.update_seq => {
                self.counters.duplicate_fragments += 1;
                return Ok(None);
            }
            slot => {
                match slot {
                    Some(r) if r.update_seq == frag.update_seq => self.counters.protocol_faults += 1,
                    Some(_) => self.counters.discarded_partials += 1,
                    None => {}
                }
                slot.insert(Reassembly::start(frag))
            }
        };
        let payload = match buffer.insert(frag) {
            Insert::Pending => return Ok(None),
            Insert::Duplicate => {
                self.counters.duplicate_fragments += 1;
                return Ok(None);
            }
            Insert::Complete(p) => p,
        };
        entry.reassembly = None;
        entry.last_completed = Some(frag.update_seq);

        let mut gen_ts = frag.gen_ts - entry.clock_offset;
        if gen_ts > now {
            // residual sync error; never let a delivery look future-dated
            self.counters.clock_faults += 1;
            gen_ts = now;
        }
        let age_after = entry.age.record_delivery(gen_ts, now)?;
        entry.counters.deliveries += 1;
        entry.counters.delivered_bytes += payload.len() as u64;
        self.counters.deliveries += 1;
        self.metrics.record_delivery(from, now, age_after, payload.len() as u64)?;
        Ok(Some(CompletedUpdate {
            follower: from,
            update_seq: frag.update_seq,
            gen_ts,
            payload,
            delivered_at: now,
            age_after,
        }))
    }

    /// Records that the outstanding poll went unanswered.
    pub fn on_timeout(&mut self) -> Result<u16, LeaderError> {
        let target = self.outstanding.take().ok_or(LeaderError::NothingOutstanding)?;
        self.counters.timeouts += 1;
        let entry = self.entry_mut(target)?;
        entry.link.record(false);
        entry.counters.failures += 1;
        Ok(target)
    }

    /// Applies the application's verdict on an update from `id`.
    pub fn apply_output(&mut self, id: u16, now: Timestamp, output: AppOutput) -> Result<(), LeaderError> {
        let entry = self.entry_mut(id)?;
        if let Some(wps) = output.waypoints {
            entry.waypoints = wps;
        }
        if let Some(v) = output.relative_speed {
            let w = entry.weight.update(v)?;
            self.metrics.set_weight(id, now, w)?;
        }
        Ok(())
    }

    /// Completes `update` through `app` and applies the result.
    pub fn deliver(&mut self, app: &mut dyn Application, update: &CompletedUpdate) -> Result<(), LeaderError> {
        let output = app.on_update(update);
        self.apply_output(update.follower, update.delivered_at, output)
    }

    /// Closes the run at `now` and hands back the metrics.
    pub fn finish(&mut self, now: Timestamp) -> Result<&MetricsAccumulator, AoiError> {
        self.metrics.finish(now)?;
        Ok(&self.metrics)
    }
}
