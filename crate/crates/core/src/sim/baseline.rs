use std::collections::VecDeque;

use bytes::Bytes;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::aoi::{AgeRecord, Duration, MetricsAccumulator, Timestamp};
use crate::follower::{fragment_update, ControlStore, UpdateSource};
use crate::leader::{Application, CompletedUpdate};
use crate::scheduler::WeightEstimator;
use crate::wire::{ControlEntry, Fragment, Waypoint};

use super::network::seed_stream;
use super::polling::SimApp;
use super::report::{build_report, RunInfo};
use super::world::TrackingWorld;
use super::{MetricsReport, SimConfig, SimError, System};

struct Station {
    source: UpdateSource,
    frags: VecDeque<Fragment>,
    /// First fragment of the update in flight; carries the observation header.
    head: Bytes,
    loss: f64,
    link_rng: ChaCha8Rng,
    offset: Duration,
    next_gen: Timestamp,
    generated: u64,
    control: ControlStore,
    age: AgeRecord,
    weight: WeightEstimator,
}

/// Slotted random access: in every slot each backlogged follower sends its
/// head fragment with probability `transmit_prob`; a lone sender gets through
/// unless the link drops it, two or more collide.
///
/// Seeds are drawn in the same order as the polling simulator so that runs
/// with equal seeds share target trajectories and generation phases.
pub fn run_random_access_baseline(config: &SimConfig) -> Result<MetricsReport, SimError> {
    config.validate()?;
    let n = config.n as usize;
    let mut seeds = seed_stream(config.seed);
    let losses = config.uplink_losses();
    let offsets = config.offsets();
    let mut link_seeds = Vec::with_capacity(n);
    for _ in 0..n {
        let _downlink: u64 = seeds.random();
        link_seeds.push(seeds.random::<u64>());
    }
    let mut world = config
        .tracking
        .clone()
        .map(|t| TrackingWorld::new(t, n, Timestamp::ZERO, seeds.random()));
    let interval = config.frame_interval();
    let mut metrics = MetricsAccumulator::new();
    let mut stations = Vec::with_capacity(n);
    for i in 0..n {
        let phase = Duration::from_micros(seeds.random_range(0..interval.as_micros().max(1)));
        stations.push(Station {
            source: UpdateSource::new(config.make_queue()),
            frags: VecDeque::new(),
            head: Bytes::new(),
            loss: losses[i],
            link_rng: ChaCha8Rng::seed_from_u64(link_seeds[i]),
            offset: offsets[i],
            next_gen: Timestamp::ZERO + phase,
            generated: 0,
            control: ControlStore::new(),
            age: AgeRecord::new(i as u16 + 1, Timestamp::ZERO),
            weight: WeightEstimator::new(1.0, config.leader.alpha)?,
        });
        metrics.register(i as u16 + 1, Timestamp::ZERO, 1.0);
    }
    let mut contention = ChaCha8Rng::seed_from_u64(seeds.random());
    let mut app = SimApp::for_config(config);
    let frame = Bytes::from(vec![0u8; config.update_bytes()]);
    let frame_bytes = config.update_bytes();
    let slot = config.slot_length();
    let end = Timestamp::ZERO + config.duration;
    let (mut attempts, mut collisions) = (0u64, 0u64);

    let mut t = Timestamp::ZERO;
    while t < end {
        // generations up to the slot start, in time order
        loop {
            let next = stations
                .iter()
                .enumerate()
                .filter(|(_, s)| s.next_gen <= t)
                .min_by_key(|(i, s)| (s.next_gen, *i))
                .map(|(i, _)| i);
            let Some(i) = next else { break };
            let at = stations[i].next_gen;
            let payload = match &mut world {
                Some(w) => {
                    w.advance_to(at, |k| (&stations[k].control, stations[k].offset));
                    w.observe(i, at + stations[i].offset).encode(frame_bytes)
                }
                None => frame.clone(),
            };
            let s = &mut stations[i];
            s.source.collect(payload, at + s.offset);
            s.generated += 1;
            s.next_gen = at + interval;
        }
        if let Some(w) = &mut world {
            w.advance_to(t, |k| (&stations[k].control, stations[k].offset));
        }

        let mut senders = Vec::new();
        for (i, s) in stations.iter_mut().enumerate() {
            if s.frags.is_empty() {
                if let Some(u) = s.source.take() {
                    s.frags.extend(fragment_update(&u, config.max_payload)?);
                }
            }
            if !s.frags.is_empty() && contention.random::<f64>() < config.transmit_prob {
                senders.push(i);
            }
        }
        attempts += senders.len() as u64;
        let done = t + slot;
        match senders[..] {
            [i] => {
                let s = &mut stations[i];
                if s.link_rng.random::<f64>() >= s.loss {
                    let frag = s.frags.pop_front().expect("sender has a fragment");
                    if frag.frag_index == 0 {
                        s.head = frag.payload.clone();
                    }
                    if frag.is_last() {
                        let id = i as u16 + 1;
                        let gen_ts = (frag.gen_ts - s.offset).min(done);
                        let age_after = s.age.record_delivery(gen_ts, done)?;
                        let size = frame_bytes as u64;
                        metrics.record_delivery(id, done, age_after, size)?;
                        let update = CompletedUpdate {
                            follower: id,
                            update_seq: frag.update_seq,
                            gen_ts,
                            payload: std::mem::take(&mut s.head),
                            delivered_at: done,
                            age_after,
                        };
                        let output = app.on_update(&update);
                        if let Some(wps) = output.waypoints {
                            let local: Vec<Waypoint> = wps.iter().map(|w| Waypoint { t: w.t + s.offset, ..*w }).collect();
                            s.control.apply_entry(&ControlEntry { follower: id, waypoints: local });
                        }
                        if let Some(v) = output.relative_speed {
                            let w = s.weight.update(v)?;
                            metrics.set_weight(id, done, w)?;
                        }
                    }
                }
            }
            [] => {}
            _ => collisions += 1,
        }
        t = done;
    }
    if let Some(w) = &mut world {
        w.advance_to(t, |k| (&stations[k].control, stations[k].offset));
    }
    metrics.finish(t)?;
    let generated: Vec<u64> = stations.iter().map(|s| s.generated).collect();
    let info = RunInfo {
        system: System::RandomAccess,
        policy: config.leader.policy,
        n: config.n,
        rate_fps: config.rate_fps,
        seed: config.seed,
        attempts,
        timeouts: 0,
        collisions,
    };
    Ok(build_report(info, &metrics, &generated, world.as_ref())?)
}
