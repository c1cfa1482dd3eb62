use std::collections::BTreeMap;

use crate::aoi::{Duration, Timestamp};
use crate::wire::{decode, encode, Message, Packet, Transport};

use super::{clock_offset, Application, Leader, LeaderError};

/// Sender id the leader puts on its own packets.
pub const LEADER_ID: u16 = 0;

/// How an await for the target's response ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpochOutcome {
    Response,
    Timeout,
    /// No follower was eligible.
    Idle,
}

/// Runs a [`Leader`] over a transport: poll, await with deadline, update.
#[derive(Debug)]
pub struct LeaderLoop<T: Transport, A: Application> {
    transport: T,
    leader: Leader,
    app: A,
    addrs: BTreeMap<u16, T::Addr>,
    next_sync: BTreeMap<u16, Timestamp>,
}

impl<T: Transport, A: Application> LeaderLoop<T, A> {
    pub fn new(transport: T, leader: Leader, app: A) -> Self {
        LeaderLoop {
            transport,
            leader,
            app,
            addrs: BTreeMap::new(),
            next_sync: BTreeMap::new(),
        }
    }

    pub fn leader(&self) -> &Leader {
        &self.leader
    }

    pub fn leader_mut(&mut self) -> &mut Leader {
        &mut self.leader
    }

    pub fn transport(&self) -> &T {
        &self.transport
    }

    pub fn transport_mut(&mut self) -> &mut T {
        &mut self.transport
    }

    pub fn app(&self) -> &A {
        &self.app
    }

    pub fn now(&self) -> Timestamp {
        self.transport.now()
    }

    /// Registers a follower; its first clock sync runs before the next poll.
    pub fn add_follower(&mut self, id: u16, addr: T::Addr) -> Result<(), LeaderError> {
        let now = self.transport.now();
        self.leader.register(id, now)?;
        self.addrs.insert(id, addr);
        self.next_sync.insert(id, now);
        Ok(())
    }

    fn id_of(&self, from: &T::Addr, sender: u16) -> Option<u16> {
        (self.addrs.get(&sender) == Some(from)).then_some(sender)
    }

    /// Decodes a datagram and hands fragments to the leader.
    ///
    /// Returns the decoded packet for anything other than a fragment.
    fn dispatch(&mut self, from: &T::Addr, bytes: &[u8]) -> Result<Option<Packet>, LeaderError> {
        let packet = match decode(bytes) {
            Ok(p) => p,
            Err(e) => {
                log::debug!("dropping datagram from {from:?}: {e}");
                self.leader.counters_mut().invalid_datagrams += 1;
                return Ok(None);
            }
        };
        let Some(id) = self.id_of(from, packet.sender) else {
            log::debug!("dropping packet from unregistered sender {} at {from:?}", packet.sender);
            self.leader.counters_mut().invalid_datagrams += 1;
            return Ok(None);
        };
        match &packet.message {
            Message::Frag(frag) => {
                let now = self.transport.now();
                if let Some(update) = self.leader.on_fragment(id, frag, now)? {
                    self.leader.deliver(&mut self.app, &update)?;
                }
                Ok(None)
            }
            _ => Ok(Some(packet)),
        }
    }

    /// Runs one two-way time exchange with `id`, retrying on silence.
    pub fn sync_follower(&mut self, id: u16) -> Result<Option<Duration>, LeaderError> {
        let addr = self.addrs.get(&id).cloned().ok_or(LeaderError::UnknownFollower(id))?;
        let timeout = self.leader.config().timeout;
        let attempts = 1 + self.leader.config().sync_retries;
        self.leader.set_eligible(id, false)?;
        let mut result = None;
        'attempts: for _ in 0..attempts {
            let t1 = self.transport.now();
            let req = encode(&Packet::new(LEADER_ID, Message::SyncReq { t1 }))?;
            self.transport.send(&addr, &req)?;
            let deadline = t1 + timeout;
            while let Some((from, bytes)) = self.transport.recv(deadline)? {
                let t4 = self.transport.now();
                if let Some(Packet {
                    sender,
                    message: Message::SyncResp { t1: echoed, t2, t3 },
                }) = self.dispatch(&from, &bytes)?
                {
                    if sender == id && echoed == t1 {
                        result = Some(clock_offset(t1, t2, t3, t4));
                        break 'attempts;
                    }
                }
            }
        }
        self.leader.set_eligible(id, true)?;
        match result {
            Some(offset) => {
                self.leader.set_clock_offset(id, offset)?;
                self.leader.counters_mut().syncs += 1;
            }
            None => {
                log::warn!("clock sync with follower {id} failed; keeping previous offset");
                self.leader.counters_mut().sync_failures += 1;
            }
        }
        let period = self.leader.config().sync_period;
        self.next_sync.insert(id, self.transport.now() + period);
        Ok(result)
    }

    /// Syncs every follower whose period has elapsed.
    pub fn run_due_syncs(&mut self) -> Result<(), LeaderError> {
        let now = self.transport.now();
        let due: Vec<u16> = self
            .next_sync
            .iter()
            .filter(|&(_, &at)| at <= now)
            .map(|(&id, _)| id)
            .collect();
        for id in due {
            self.sync_follower(id)?;
        }
        Ok(())
    }

    /// One decision epoch: poll the chosen follower (the poll goes to every
    /// follower so all receive the control broadcast) and wait for its answer.
    pub fn epoch(&mut self) -> Result<EpochOutcome, LeaderError> {
        self.run_due_syncs()?;
        let now = self.transport.now();
        let Some(poll) = self.leader.decision_epoch(now)? else {
            return Ok(EpochOutcome::Idle);
        };
        let bytes = encode(&Packet::new(LEADER_ID, Message::Poll(poll)))?;
        for addr in self.addrs.values() {
            self.transport.send(addr, &bytes)?;
        }
        let deadline = now + self.leader.config().timeout;
        while let Some((from, bytes)) = self.transport.recv(deadline)? {
            self.dispatch(&from, &bytes)?;
            if self.leader.outstanding().is_none() {
                return Ok(EpochOutcome::Response);
            }
        }
        self.leader.on_timeout()?;
        Ok(EpochOutcome::Timeout)
    }

    /// Runs epochs until the transport clock reaches `end`.
    pub fn run_until(&mut self, end: Timestamp) -> Result<(), LeaderError> {
        while self.transport.now() < end {
            if self.epoch()? == EpochOutcome::Idle {
                // nothing to poll; let time pass
                let wait = (self.transport.now() + self.leader.config().timeout).min(end);
                while let Some((from, bytes)) = self.transport.recv(wait)? {
                    self.dispatch(&from, &bytes)?;
                }
            }
        }
        Ok(())
    }

    pub fn into_parts(self) -> (T, Leader, A) {
        (self.transport, self.leader, self.app)
    }
}
