use std::collections::VecDeque;

use bytes::Bytes;

use crate::aoi::Timestamp;
use crate::wire::{decode, Fragment, Message, Packet, PollPacket};

use super::{fragment_update, ControlStore, FollowerError, UpdateQueue, UpdateSource};

/// What the follower sends back after handling a datagram.
#[derive(Debug, Clone, PartialEq)]
pub enum Reply {
    Frag(Fragment),
    /// Clock-sync answer; `t3` is stamped when the reply is built for sending.
    SyncResp { t1: Timestamp, t2: Timestamp },
}

impl Reply {
    pub fn into_packet(self, sender: u16, send_time: Timestamp) -> Packet {
        let message = match self {
            Reply::Frag(f) => Message::Frag(f),
            Reply::SyncResp { t1, t2 } => Message::SyncResp { t1, t2, t3: send_time },
        };
        Packet::new(sender, message)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FollowerStats {
    pub polls_seen: u64,
    pub polls_targeted: u64,
    pub no_data_sent: u64,
    pub fragments_acked: u64,
    pub updates_released: u64,
    pub sync_requests: u64,
    pub malformed: u64,
}

/// Follower-side responder: answers polls from the fragment queue and keeps
/// the latest control broadcast.
#[derive(Debug)]
pub struct FollowerNode {
    id: u16,
    max_payload: usize,
    source: UpdateSource,
    fragments: VecDeque<Fragment>,
    control: ControlStore,
    stats: FollowerStats,
}

impl FollowerNode {
    pub fn new(id: u16, queue: UpdateQueue, max_payload: usize) -> Result<Self, FollowerError> {
        Self::with_source(id, UpdateSource::new(queue), max_payload)
    }

    /// Builds a node around an existing source, e.g. one shared with a
    /// sensing thread.
    pub fn with_source(id: u16, source: UpdateSource, max_payload: usize) -> Result<Self, FollowerError> {
        if max_payload == 0 || max_payload > u16::MAX as usize {
            return Err(FollowerError::BadMaxPayload(max_payload));
        }
        Ok(FollowerNode {
            id,
            max_payload,
            source,
            fragments: VecDeque::new(),
            control: ControlStore::new(),
            stats: FollowerStats::default(),
        })
    }

    pub fn id(&self) -> u16 {
        self.id
    }

    pub fn source(&self) -> &UpdateSource {
        &self.source
    }

    pub fn control(&self) -> &ControlStore {
        &self.control
    }

    pub fn stats(&self) -> FollowerStats {
        self.stats
    }

    pub fn pending_fragments(&self) -> usize {
        self.fragments.len()
    }

    /// Offers a freshly collected reading to the update queue.
    pub fn collect(&self, payload: Bytes, now: Timestamp) -> bool {
        self.source.collect(payload, now)
    }

    /// Takes in the poll's control broadcast and, if the poll targets this
    /// follower, returns the fragment to transmit.
    pub fn handle_poll(&mut self, poll: &PollPacket, now: Timestamp) -> Option<Fragment> {
        self.stats.polls_seen += 1;
        if let Some(entry) = poll.control.iter().find(|e| e.follower == self.id) {
            self.control.apply_entry(entry);
        }
        if poll.target != self.id {
            return None;
        }
        self.stats.polls_targeted += 1;

        if let Some(ack) = poll.ack {
            while self.fragments.front().is_some_and(|f| f.ack() <= ack) {
                self.fragments.pop_front();
                self.stats.fragments_acked += 1;
            }
        }
        while self.fragments.is_empty() {
            let Some(update) = self.source.take() else { break };
            self.stats.updates_released += 1;
            match fragment_update(&update, self.max_payload) {
                Ok(frags) => self.fragments.extend(frags),
                Err(e) => log::warn!("follower {}: dropping update {}: {e}", self.id, update.update_seq),
            }
        }
        match self.fragments.front() {
            Some(head) => Some(head.clone()),
            None => {
                self.stats.no_data_sent += 1;
                Some(Fragment::no_data(now))
            }
        }
    }

    pub fn on_packet(&mut self, packet: &Packet, now: Timestamp) -> Option<Reply> {
        match &packet.message {
            Message::Poll(poll) => self.handle_poll(poll, now).map(Reply::Frag),
            Message::SyncReq { t1 } => {
                self.stats.sync_requests += 1;
                Some(Reply::SyncResp { t1: *t1, t2: now })
            }
            Message::Frag(_) | Message::SyncResp { .. } => None,
        }
    }

    /// Decodes and handles one datagram; malformed input is dropped silently.
    pub fn on_datagram(&mut self, bytes: &[u8], now: Timestamp) -> Option<Reply> {
        match decode(bytes) {
            Ok(packet) => self.on_packet(&packet, now),
            Err(e) => {
                self.stats.malformed += 1;
                log::debug!("follower {}: ignoring datagram: {e}", self.id);
                None
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aoi::Duration;
    use crate::wire::{encode, Ack, ControlEntry, Waypoint};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ts(v: i64) -> Timestamp {
        Timestamp::from_micros(v)
    }

    fn poll(target: u16, ack: Option<(u32, u16)>) -> PollPacket {
        PollPacket {
            poll_seq: 1,
            target,
            ack: ack.map(|(update_seq, frag_index)| Ack { update_seq, frag_index }),
            control: vec![],
        }
    }

    fn fifo_node(sizes: &[usize], max_payload: usize) -> FollowerNode {
        let node = FollowerNode::new(1, UpdateQueue::fifo(Duration::ZERO, 1024), max_payload).unwrap();
        for (k, &len) in sizes.iter().enumerate() {
            assert!(node.collect(Bytes::from(vec![k as u8; len]), ts(k as i64)));
        }
        node
    }

    fn key(f: &Fragment) -> (u32, u16) {
        (f.update_seq, f.frag_index)
    }

    #[test]
    fn cumulative_ack_walk() {
        let mut node = fifo_node(&[20], 10);
        let f0 = node.handle_poll(&poll(1, None), ts(0)).unwrap();
        assert_eq!(key(&f0), (1, 0));
        let again = node.handle_poll(&poll(1, None), ts(1)).unwrap();
        assert_eq!(key(&again), (1, 0));
        let f1 = node.handle_poll(&poll(1, Some((1, 0))), ts(2)).unwrap();
        assert_eq!(key(&f1), (1, 1));
    }

    #[test]
    fn empty_queues_answer_no_data() {
        let mut node = fifo_node(&[], 10);
        let f = node.handle_poll(&poll(1, None), ts(77)).unwrap();
        assert!(f.is_no_data());
        assert!(f.payload.is_empty());
        assert_eq!(f.gen_ts, ts(77));
        assert_eq!(node.stats().no_data_sent, 1);
    }

    #[test]
    fn ack_past_head_moves_to_next_update() {
        let mut node = fifo_node(&[20, 5], 10);
        node.handle_poll(&poll(1, None), ts(0));
        let f = node.handle_poll(&poll(1, Some((1, 1))), ts(1)).unwrap();
        assert_eq!(key(&f), (2, 0));
        assert_eq!(node.stats().fragments_acked, 2);
    }

    #[test]
    fn poll_for_someone_else_only_updates_control() {
        let mut node = fifo_node(&[5], 10);
        let mut p = poll(2, None);
        p.control = vec![
            ControlEntry {
                follower: 2,
                waypoints: vec![Waypoint { t: ts(1), x: 9.0, y: 9.0, z: 9.0 }],
            },
            ControlEntry {
                follower: 1,
                waypoints: vec![Waypoint { t: ts(5), x: 1.0, y: 2.0, z: 3.0 }],
            },
        ];
        assert_eq!(node.handle_poll(&p, ts(0)), None);
        assert_eq!(node.control().waypoints()[0].x, 1.0);
        assert_eq!(node.pending_fragments(), 0);
        assert_eq!(node.source().len(), 1);
    }

    #[test]
    fn sync_request_echoes_t1() {
        let mut node = fifo_node(&[], 10);
        let req = encode(&Packet::new(0, Message::SyncReq { t1: ts(5) })).unwrap();
        let reply = node.on_datagram(&req, ts(105)).unwrap();
        assert_eq!(
            reply.into_packet(1, ts(106)).message,
            Message::SyncResp { t1: ts(5), t2: ts(105), t3: ts(106) }
        );
    }

    #[test]
    fn garbage_is_ignored() {
        let mut node = fifo_node(&[5], 10);
        assert_eq!(node.on_datagram(&[0xA6, 0x01], ts(0)), None);
        assert_eq!(node.on_datagram(&[], ts(0)), None);
        assert_eq!(node.stats().malformed, 2);
    }

    /// Index-based model of the responder: `loaded` points at the next unacked
    /// fragment of the update currently being sent.
    struct Reference {
        counts: Vec<u16>,
        next_update: usize,
        loaded: Option<(usize, u16)>,
    }

    impl Reference {
        fn poll(&mut self, ack: Option<(u32, u16)>) -> Option<(u32, u16)> {
            if let (Some((u, mut k)), Some(a)) = (self.loaded, ack) {
                while k < self.counts[u] && (u as u32 + 1, k) <= a {
                    k += 1;
                }
                self.loaded = (k < self.counts[u]).then_some((u, k));
            }
            if self.loaded.is_none() && self.next_update < self.counts.len() {
                self.loaded = Some((self.next_update, 0));
                self.next_update += 1;
            }
            self.loaded.map(|(u, k)| (u as u32 + 1, k))
        }
    }

    #[test]
    fn ack_coverage_matches_reference() {
        // every sequence of three acks drawn from all (seq, idx) pairs near the
        // two queued updates, plus "no ack"
        let sizes = [30usize, 20];
        let counts = vec![3u16, 2];
        let mut acks: Vec<Option<(u32, u16)>> = vec![None];
        for seq in 0..=3u32 {
            for idx in 0..=3u16 {
                acks.push(Some((seq, idx)));
            }
        }
        for a in &acks {
            for b in &acks {
                for c in &acks {
                    let mut node = fifo_node(&sizes, 10);
                    let mut reference = Reference {
                        counts: counts.clone(),
                        next_update: 0,
                        loaded: None,
                    };
                    for ack in [*a, *b, *c] {
                        let got = node.handle_poll(&poll(1, ack), ts(0)).unwrap();
                        let want = reference.poll(ack);
                        match want {
                            Some(k) => assert_eq!(key(&got), k, "acks {a:?} {b:?} {c:?}"),
                            None => assert!(got.is_no_data()),
                        }
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn lossy_exchange_never_skips_a_fragment(
            sizes in prop::collection::vec(0usize..50, 1..6),
            seed in any::<u64>(),
            loss in 0.0f64..0.8,
        ) {
            let mut node = fifo_node(&sizes, 10);
            let stream: Vec<(u32, u16)> = sizes
                .iter()
                .enumerate()
                .flat_map(|(u, &len)| (0..len.div_ceil(10).max(1) as u16).map(move |k| (u as u32 + 1, k)))
                .collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut received: Vec<(u32, u16)> = Vec::new();
            let mut ack = None;
            for _ in 0..2_000 {
                if received.len() == stream.len() {
                    break;
                }
                if rng.random::<f64>() < loss {
                    continue;
                }
                let frag = node.handle_poll(&poll(1, ack), ts(0)).unwrap();
                if rng.random::<f64>() < loss {
                    continue;
                }
                prop_assert!(!frag.is_no_data());
                let k = key(&frag);
                if received.last() != Some(&k) {
                    received.push(k);
                }
                ack = Some(k);
            }
            prop_assert_eq!(&received[..], &stream[..received.len()]);
        }
    }
}
