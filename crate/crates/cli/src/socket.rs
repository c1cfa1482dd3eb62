//! Leader and follower processes over real UDP sockets.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::Instant;

use bytes::Bytes;
use freshlink_core::aoi::{Duration, Timestamp};
use freshlink_core::follower::{FollowerNode, FollowerStats, UpdateQueue, UpdateSource};
use freshlink_core::leader::{Leader, LeaderConfig, LeaderCounters, LeaderLoop, NullApp};
use freshlink_core::sim::MetricsReport;
use freshlink_core::wire::{encode, Transport, UdpTransport};

use crate::CliError;

#[derive(Debug, Clone)]
pub struct LeaderSettings {
    pub bind: SocketAddr,
    pub followers: Vec<(u16, SocketAddr)>,
    pub config: LeaderConfig,
    pub duration: Duration,
}

#[derive(Debug, Clone)]
pub struct LeaderOutcome {
    pub counters: LeaderCounters,
    pub report: MetricsReport,
}

pub fn run_leader(settings: &LeaderSettings) -> Result<LeaderOutcome, CliError> {
    settings.config.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let transport = UdpTransport::bind(settings.bind)
        .map_err(|e| CliError::Runtime(format!("bind {}: {e}", settings.bind)))?;
    let leader = Leader::new(settings.config.clone()).map_err(|e| CliError::Config(e.to_string()))?;
    let mut lp = LeaderLoop::new(transport, leader, NullApp);
    let end = lp.now() + settings.duration;
    for (id, addr) in &settings.followers {
        lp.add_follower(*id, *addr).map_err(|e| CliError::Config(e.to_string()))?;
    }
    log::info!("leader on {} polling {} followers", settings.bind, settings.followers.len());
    lp.run_until(end).map_err(|e| CliError::Runtime(e.to_string()))?;
    let stop = lp.now();
    let (_, mut leader, _) = lp.into_parts();
    let counters = leader.counters();
    let report = MetricsReport::from_leader(&mut leader, stop, 0.0).map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(LeaderOutcome { counters, report })
}

#[derive(Debug, Clone)]
pub struct FollowerSettings {
    pub bind: SocketAddr,
    pub id: u16,
    pub queue: UpdateQueue,
    pub rate_fps: f64,
    pub payload_bytes: usize,
    pub max_payload: usize,
    pub duration: Duration,
    /// Skew applied to this follower's clock.
    pub clock_offset: Duration,
}

#[derive(Debug, Clone, Copy)]
pub struct FollowerOutcome {
    pub stats: FollowerStats,
    pub offered: u64,
    pub accepted: u64,
    /// Datagrams sent back to the leader.
    pub replies: u64,
}

/// Runs a sensing thread at `rate_fps` and answers polls until `duration`
/// has passed.
pub fn run_follower(settings: &FollowerSettings) -> Result<FollowerOutcome, CliError> {
    if settings.id == 0 {
        return Err(CliError::Config("follower id 0 is reserved for the leader".into()));
    }
    if !(settings.rate_fps > 0.0 && settings.rate_fps.is_finite()) {
        return Err(CliError::Config(format!("rate {} fps must be positive", settings.rate_fps)));
    }
    let source = UpdateSource::new(settings.queue.clone());
    let mut node = FollowerNode::with_source(settings.id, source.clone(), settings.max_payload)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut transport = UdpTransport::bind(settings.bind)
        .map_err(|e| CliError::Runtime(format!("bind {}: {e}", settings.bind)))?
        .with_clock_offset(settings.clock_offset);

    let stop = Arc::new(AtomicBool::new(false));
    let producer = {
        let stop = Arc::clone(&stop);
        let source = source.clone();
        let offset = settings.clock_offset;
        let payload = Bytes::from(vec![0u8; settings.payload_bytes]);
        let interval = std::time::Duration::from_secs_f64(1.0 / settings.rate_fps);
        thread::spawn(move || {
            let mut next = Instant::now();
            while !stop.load(Ordering::Relaxed) {
                source.collect(payload.clone(), Timestamp::now_system() + offset);
                next += interval;
                thread::sleep(next.saturating_duration_since(Instant::now()));
            }
        })
    };

    let end = transport.now() + settings.duration;
    let mut replies = 0;
    let result = (|| -> Result<(), CliError> {
        loop {
            let now = transport.now();
            if now >= end {
                return Ok(());
            }
            let deadline = end.min(now + Duration::from_millis(200));
            let io = |e: std::io::Error| CliError::Runtime(format!("socket: {e}"));
            let Some((from, bytes)) = transport.recv(deadline).map_err(io)? else {
                continue;
            };
            if let Some(reply) = node.on_datagram(&bytes, transport.now()) {
                let packet = reply.into_packet(settings.id, transport.now());
                let out = encode(&packet).map_err(|e| CliError::Runtime(e.to_string()))?;
                transport.send(&from, &out).map_err(io)?;
                replies += 1;
            }
        }
    })();
    stop.store(true, Ordering::Relaxed);
    let _ = producer.join();
    result?;
    let (offered, accepted) = source.counts();
    Ok(FollowerOutcome { stats: node.stats(), offered, accepted, replies })
}
