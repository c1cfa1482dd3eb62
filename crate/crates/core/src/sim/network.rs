use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::io;

use bytes::Bytes;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::aoi::{Duration, Timestamp};
use crate::follower::{FollowerNode, Reply};
use crate::wire::{decode, encode, Message, SimLink, Transport};

use super::world::TrackingWorld;
use super::{Generation, SimConfig, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Event {
    ToFollower(u16),
    ToLeader(u16),
    Generate(u16),
}

#[derive(Debug)]
pub(crate) struct SimFollower {
    pub node: FollowerNode,
    down: SimLink,
    up: SimLink,
    pub clock_offset: Duration,
    pub generated: u64,
}

/// Discrete-event network joining one leader (the caller of [`Transport`])
/// with simulated followers. Time only moves inside `recv`.
#[derive(Debug)]
pub struct SimNetwork {
    now: Timestamp,
    seq: u64,
    events: BinaryHeap<Reverse<(Timestamp, u64, Event)>>,
    pub(crate) followers: Vec<SimFollower>,
    inbox: VecDeque<(u16, Vec<u8>)>,
    pub(crate) world: Option<TrackingWorld>,
    generation: Generation,
    interval: Duration,
    frame: Bytes,
    frame_bytes: usize,
    turnaround: Duration,
    bitrate_bps: f64,
}

/// Seed stream shared by the simulators so equal configs give equal runs.
pub(crate) fn seed_stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_F00D_0000_0000)
}

impl SimNetwork {
    pub fn new(config: &SimConfig) -> Result<Self, SimError> {
        config.validate()?;
        let mut seeds = seed_stream(config.seed);
        let up_loss = config.uplink_losses();
        let down_loss = config.downlink_losses();
        let offsets = config.offsets();
        let mut followers = Vec::with_capacity(config.n as usize);
        for i in 0..config.n as usize {
            let node = FollowerNode::new(i as u16 + 1, config.make_queue(), config.max_payload)?;
            followers.push(SimFollower {
                node,
                down: SimLink::new(down_loss[i], config.downlink_latency, seeds.random()),
                up: SimLink::new(up_loss[i], config.uplink_latency, seeds.random()),
                clock_offset: offsets[i],
                generated: 0,
            });
        }
        let world = config
            .tracking
            .clone()
            .map(|t| TrackingWorld::new(t, config.n as usize, Timestamp::ZERO, seeds.random()));
        let mut net = SimNetwork {
            now: Timestamp::ZERO,
            seq: 0,
            events: BinaryHeap::new(),
            followers,
            inbox: VecDeque::new(),
            world,
            generation: config.generation,
            interval: config.frame_interval(),
            frame: Bytes::from(vec![0u8; config.update_bytes()]),
            frame_bytes: config.update_bytes(),
            turnaround: config.turnaround,
            bitrate_bps: config.bitrate_bps,
        };
        if config.generation == Generation::Periodic {
            for id in 1..=config.n {
                let phase = Duration::from_micros(seeds.random_range(0..net.interval.as_micros().max(1)));
                net.schedule(Timestamp::ZERO + phase, Event::Generate(id));
            }
        }
        Ok(net)
    }

    fn schedule(&mut self, at: Timestamp, event: Event) {
        self.seq += 1;
        self.events.push(Reverse((at, self.seq, event)));
    }

    fn airtime(&self, bytes: usize) -> Duration {
        Duration::from_secs_f64(bytes as f64 * 8.0 / self.bitrate_bps)
    }

    /// Total updates offered to follower queues so far.
    pub fn generated(&self, id: u16) -> u64 {
        self.followers[id as usize - 1].generated
    }

    pub fn node(&self, id: u16) -> &FollowerNode {
        &self.followers[id as usize - 1].node
    }

    pub fn world(&self) -> Option<&TrackingWorld> {
        self.world.as_ref()
    }

    /// Steps the tracking world (if any) up to `t`.
    pub fn advance_world(&mut self, t: Timestamp) {
        if let Some(world) = &mut self.world {
            let followers = &self.followers;
            world.advance_to(t, |i| (followers[i].node.control(), followers[i].clock_offset));
        }
    }

    fn generate(&mut self, id: u16) {
        let i = id as usize - 1;
        let local = self.now + self.followers[i].clock_offset;
        let payload = match &self.world {
            Some(w) => w.observe(i, local).encode(self.frame_bytes),
            None => self.frame.clone(),
        };
        let f = &mut self.followers[i];
        f.generated += 1;
        f.node.collect(payload, local);
    }

    fn process(&mut self, event: Event) -> Result<(), SimError> {
        match event {
            Event::Generate(id) => {
                self.generate(id);
                let next = self.now + self.interval;
                self.schedule(next, Event::Generate(id));
            }
            Event::ToLeader(id) => {
                let bytes = self.followers[id as usize - 1]
                    .up
                    .recv(self.now)
                    .ok_or(SimError::Internal("uplink event without datagram"))?;
                self.inbox.push_back((id, bytes));
            }
            Event::ToFollower(id) => {
                let i = id as usize - 1;
                let bytes = self.followers[i]
                    .down
                    .recv(self.now)
                    .ok_or(SimError::Internal("downlink event without datagram"))?;
                let Ok(packet) = decode(&bytes) else {
                    return Ok(());
                };
                if self.generation == Generation::OnPoll {
                    if let Message::Poll(p) = &packet.message {
                        if p.target == id {
                            self.generate(id);
                        }
                    }
                }
                let f = &mut self.followers[i];
                let local = self.now + f.clock_offset;
                let Some(reply) = f.node.on_packet(&packet, local) else {
                    return Ok(());
                };
                let tx = match &reply {
                    Reply::Frag(frag) => self.airtime(frag.payload.len()),
                    Reply::SyncResp { .. } => Duration::ZERO,
                };
                let send_at = self.now + self.turnaround;
                let f = &mut self.followers[i];
                let bytes = encode(&reply.into_packet(id, send_at + f.clock_offset))?;
                if let Some(at) = f.up.send(send_at, bytes, tx) {
                    self.schedule(at, Event::ToLeader(id));
                }
            }
        }
        Ok(())
    }

    fn run_event(&mut self) -> io::Result<()> {
        let Some(Reverse((at, _, event))) = self.events.pop() else {
            return Ok(());
        };
        self.advance_world(at);
        self.now = at;
        self.process(event).map_err(io::Error::other)
    }
}

impl Transport for SimNetwork {
    type Addr = u16;

    fn now(&self) -> Timestamp {
        self.now
    }

    fn send(&mut self, to: &u16, bytes: &[u8]) -> io::Result<()> {
        let f = self
            .followers
            .get_mut((*to as usize).wrapping_sub(1))
            .ok_or_else(|| io::Error::new(io::ErrorKind::NotFound, format!("no follower {to}")))?;
        if let Some(at) = f.down.send(self.now, bytes.to_vec(), Duration::ZERO) {
            self.schedule(at, Event::ToFollower(*to));
        }
        Ok(())
    }

    fn recv(&mut self, deadline: Timestamp) -> io::Result<Option<(u16, Vec<u8>)>> {
        loop {
            if let Some(d) = self.inbox.pop_front() {
                return Ok(Some(d));
            }
            match self.events.peek() {
                Some(Reverse((at, _, _))) if *at <= deadline => self.run_event()?,
                _ => {
                    if deadline > self.now {
                        self.advance_world(deadline);
                        self.now = deadline;
                    }
                    return Ok(None);
                }
            }
        }
    }
}
