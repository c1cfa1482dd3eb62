use std::fmt;
use std::str::FromStr;

use crate::aoi::Duration;
use crate::follower::{UpdateQueue, DEFAULT_MAX_PAYLOAD};
use crate::leader::LeaderConfig;
use crate::wire::FRAG_OVERHEAD;

use super::SimError;

/// Which network stack to simulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum System {
    /// Leader-coordinated polling middleware.
    Polling,
    /// Slotted random-access contention with per-follower FIFO queues.
    RandomAccess,
}

impl System {
    pub fn as_str(self) -> &'static str {
        match self {
            System::Polling => "polling",
            System::RandomAccess => "random_access",
        }
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for System {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "polling" => Ok(System::Polling),
            "random_access" => Ok(System::RandomAccess),
            other => Err(format!("unknown system `{other}` (expected polling or random_access)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QueueKind {
    Lifo,
    Fifo,
}

impl QueueKind {
    pub fn as_str(self) -> &'static str {
        match self {
            QueueKind::Lifo => "lifo",
            QueueKind::Fifo => "fifo",
        }
    }
}

impl FromStr for QueueKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lifo" => Ok(QueueKind::Lifo),
            "fifo" => Ok(QueueKind::Fifo),
            other => Err(format!("unknown queue `{other}` (expected lifo or fifo)")),
        }
    }
}

/// When followers produce updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Generation {
    /// At `rate_fps`, each follower with its own random phase.
    Periodic,
    /// Whenever a poll for that follower arrives (generate-at-will).
    OnPoll,
}

impl Generation {
    pub fn as_str(self) -> &'static str {
        match self {
            Generation::Periodic => "periodic",
            Generation::OnPoll => "on_poll",
        }
    }
}

impl FromStr for Generation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "periodic" => Ok(Generation::Periodic),
            "on_poll" => Ok(Generation::OnPoll),
            other => Err(format!("unknown generation `{other}` (expected periodic or on_poll)")),
        }
    }
}

/// Mobility-tracking scenario parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackingConfig {
    /// Arena extent in metres along x and y.
    pub arena: [f64; 2],
    pub fov_radius: f64,
    pub target_max_speed: f64,
    pub resample_period: Duration,
    pub pause_prob: f64,
    pub follower_max_speed: f64,
    pub altitude: f64,
    pub sample_step: Duration,
    /// Observation frames are zero-padded to this size.
    pub frame_bytes: usize,
    /// When false, agents never receive waypoints.
    pub closed_loop: bool,
}

impl Default for TrackingConfig {
    fn default() -> Self {
        TrackingConfig {
            arena: [20.0, 10.0],
            fov_radius: 2.5,
            target_max_speed: 1.0,
            resample_period: Duration::from_millis(500),
            pause_prob: 0.2,
            follower_max_speed: 2.0,
            altitude: 2.0,
            sample_step: Duration::from_millis(10),
            frame_bytes: 49_000,
            closed_loop: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub duration: Duration,
    pub n: u16,
    pub system: System,
    /// Per-follower uplink loss; a single value applies to everyone.
    pub uplink_loss: Vec<f64>,
    pub downlink_loss: Vec<f64>,
    pub uplink_latency: Duration,
    pub downlink_latency: Duration,
    pub bitrate_bps: f64,
    pub turnaround: Duration,
    /// Follower clock minus true time; empty means synchronised clocks.
    pub clock_offsets: Vec<Duration>,
    pub rate_fps: f64,
    pub payload_bytes: usize,
    pub queue: QueueKind,
    pub capacity: usize,
    /// FIFO admits at most one update per `1 / rate_fps` when set.
    pub rate_control: bool,
    pub max_payload: usize,
    pub generation: Generation,
    pub leader: LeaderConfig,
    /// Random-access slot length; derived from the fragment airtime when unset.
    pub slot: Option<Duration>,
    pub transmit_prob: f64,
    pub tracking: Option<TrackingConfig>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 1,
            duration: Duration::from_secs(60),
            n: 4,
            system: System::Polling,
            uplink_loss: vec![0.0],
            downlink_loss: vec![0.0],
            uplink_latency: Duration::from_millis(1),
            downlink_latency: Duration::from_millis(1),
            bitrate_bps: 20e6,
            turnaround: Duration::from_millis(1),
            clock_offsets: Vec::new(),
            rate_fps: 30.0,
            payload_bytes: 6_000,
            queue: QueueKind::Lifo,
            capacity: 20,
            rate_control: true,
            max_payload: DEFAULT_MAX_PAYLOAD,
            generation: Generation::Periodic,
            leader: LeaderConfig::default(),
            slot: None,
            transmit_prob: 0.2,
            tracking: None,
        }
    }
}

fn per_follower<T: Copy>(values: &[T], n: u16, default: T) -> Vec<T> {
    match values.len() {
        0 => vec![default; n as usize],
        1 => vec![values[0]; n as usize],
        _ => values.to_vec(),
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidConfig(msg));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.duration <= Duration::ZERO {
            return bad("duration must be positive".into());
        }
        for (name, list) in [("uplink_loss", &self.uplink_loss), ("downlink_loss", &self.downlink_loss)] {
            if list.len() > 1 && list.len() != self.n as usize {
                return bad(format!("{name} has {} entries for {} followers", list.len(), self.n));
            }
            if let Some(p) = list.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return bad(format!("{name} {p} outside [0, 1]"));
            }
        }
        if self.clock_offsets.len() > 1 && self.clock_offsets.len() != self.n as usize {
            return bad(format!(
                "clock_offsets has {} entries for {} followers",
                self.clock_offsets.len(),
                self.n
            ));
        }
        if self.uplink_latency.is_negative() || self.downlink_latency.is_negative() || self.turnaround.is_negative() {
            return bad("latencies must be non-negative".into());
        }
        if !(self.bitrate_bps > 0.0 && self.bitrate_bps.is_finite()) {
            return bad("bitrate must be positive".into());
        }
        if !(self.rate_fps > 0.0 && self.rate_fps.is_finite()) {
            return bad("rate_fps must be positive".into());
        }
        if self.capacity == 0 {
            return bad("capacity must be at least 1".into());
        }
        if self.max_payload == 0 || self.max_payload > u16::MAX as usize {
            return bad(format!("max_payload {} outside 1..=65535", self.max_payload));
        }
        if self.payload_bytes.div_ceil(self.max_payload) > u16::MAX as usize {
            return bad("payload needs more than 65535 fragments".into());
        }
        if !(0.0..=1.0).contains(&self.transmit_prob) {
            return bad(format!("transmit_prob {} outside [0, 1]", self.transmit_prob));
        }
        if self.slot.is_some_and(|s| s <= Duration::ZERO) {
            return bad("slot must be positive".into());
        }
        if self.system == System::RandomAccess && self.generation == Generation::OnPoll {
            return bad("on_poll generation needs the polling system".into());
        }
        if let Some(t) = &self.tracking {
            if !(t.arena[0] > 0.0 && t.arena[1] > 0.0) {
                return bad("arena must have positive extent".into());
            }
            if t.fov_radius < 0.0 || t.target_max_speed < 0.0 || t.follower_max_speed < 0.0 {
                return bad("tracking radii and speeds must be non-negative".into());
            }
            if !(0.0..=1.0).contains(&t.pause_prob) {
                return bad(format!("pause_prob {} outside [0, 1]", t.pause_prob));
            }
            if t.resample_period <= Duration::ZERO || t.sample_step <= Duration::ZERO {
                return bad("resample period and sample step must be positive".into());
            }
        }
        self.leader
            .validate()
            .map_err(|e| SimError::InvalidConfig(e.to_string()))
    }

    pub fn uplink_losses(&self) -> Vec<f64> {
        per_follower(&self.uplink_loss, self.n, 0.0)
    }

    pub fn downlink_losses(&self) -> Vec<f64> {
        per_follower(&self.downlink_loss, self.n, 0.0)
    }

    pub fn offsets(&self) -> Vec<Duration> {
        per_follower(&self.clock_offsets, self.n, Duration::ZERO)
    }

    pub fn frame_interval(&self) -> Duration {
        Duration::from_secs_f64(1.0 / self.rate_fps)
    }

    /// Bytes in each generated update.
    pub fn update_bytes(&self) -> usize {
        match &self.tracking {
            Some(t) => t.frame_bytes.max(crate::leader::OBSERVATION_LEN),
            None => self.payload_bytes,
        }
    }

    pub fn make_queue(&self) -> UpdateQueue {
        match self.queue {
            QueueKind::Lifo => UpdateQueue::lifo(),
            QueueKind::Fifo => {
                let interval = if self.rate_control { self.frame_interval() } else { Duration::ZERO };
                UpdateQueue::fifo(interval, self.capacity)
            }
        }
    }

    /// Time to put `bytes` on the air.
    pub fn airtime(&self, bytes: usize) -> Duration {
        Duration::from_secs_f64(bytes as f64 * 8.0 / self.bitrate_bps)
    }

    /// Slot length for random access: one full fragment plus the uplink delay.
    pub fn slot_length(&self) -> Duration {
        self.slot.unwrap_or_else(|| {
            let frag = self.update_bytes().min(self.max_payload) + FRAG_OVERHEAD;
            self.airtime(frag) + self.uplink_latency
        })
    }
}
