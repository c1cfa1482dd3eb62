//! Leader and followers talking only through encoded datagrams.

use std::collections::HashMap;

use bytes::Bytes;
use freshlink_core::follower::{FollowerNode, UpdateQueue};
use freshlink_core::leader::{Leader, LeaderConfig, LEADER_ID};
use freshlink_core::wire::{decode, encode, Message, Packet};
use freshlink_core::{Duration, Timestamp};

const IDS: [u16; 3] = [1, 2, 3];
const PAYLOAD: usize = 5000;

fn reading(id: u16, n: u32) -> Bytes {
    let mut v = vec![(n % 251) as u8; PAYLOAD];
    v[..2].copy_from_slice(&id.to_be_bytes());
    v[2..6].copy_from_slice(&n.to_be_bytes());
    Bytes::from(v)
}

struct Outcome {
    leader: Leader,
    delivered: HashMap<u16, Vec<u32>>,
}

/// Runs `steps` 1 ms epochs; `drop_reply(k)` loses the k-th follower reply.
fn exchange(steps: i64, drop_reply: impl Fn(u64) -> bool) -> Outcome {
    let mut leader = Leader::new(LeaderConfig::default()).unwrap();
    let mut nodes: Vec<FollowerNode> =
        IDS.iter().map(|&id| FollowerNode::new(id, UpdateQueue::lifo(), 1400).unwrap()).collect();
    for &id in &IDS {
        leader.register(id, Timestamp::ZERO).unwrap();
    }
    let mut produced: HashMap<u16, u32> = HashMap::new();
    let mut delivered: HashMap<u16, Vec<u32>> = HashMap::new();
    let mut replies = 0u64;

    for step in 0..steps {
        let now = Timestamp::ZERO + Duration::from_millis(step);
        if step % 20 == 0 {
            for node in &nodes {
                let n = produced.entry(node.id()).or_default();
                *n += 1;
                assert!(node.collect(reading(node.id(), *n), now));
            }
        }
        let Some(poll) = leader.decision_epoch(now).unwrap() else { continue };
        let datagram = encode(&Packet::new(LEADER_ID, Message::Poll(poll))).unwrap();
        let mut answer = None;
        for node in &mut nodes {
            if let Some(reply) = node.on_datagram(&datagram, now) {
                assert!(answer.is_none(), "two followers answered one poll");
                answer = Some(encode(&reply.into_packet(node.id(), now)).unwrap());
            }
        }
        let answer = answer.expect("the target always answers");
        replies += 1;
        if drop_reply(replies) {
            leader.on_timeout().unwrap();
            continue;
        }
        let packet = decode(&answer).unwrap();
        let Message::Frag(frag) = packet.message else { panic!("unexpected reply {packet:?}") };
        if let Some(update) = leader.on_fragment(packet.sender, &frag, now).unwrap() {
            let n = u32::from_be_bytes(update.payload[2..6].try_into().unwrap());
            assert_eq!(update.payload, reading(packet.sender, n), "payload corrupted");
            assert!(update.gen_ts <= now);
            delivered.entry(packet.sender).or_default().push(n);
        }
    }
    Outcome { leader, delivered }
}

#[test]
fn lossless_exchange_delivers_fresh_exact_updates() {
    let out = exchange(2000, |_| false);
    let c = out.leader.counters();
    assert_eq!(c.polls, c.responses);
    assert_eq!(c.timeouts, 0);
    for id in IDS {
        let seen = &out.delivered[&id];
        assert!(seen.windows(2).all(|w| w[0] < w[1]), "follower {id} out of order: {seen:?}");
        // 4 fragments per reading and 3 followers: a reading every 20 ms
        // fits easily, so LIFO delivers nearly every one
        assert!(seen.len() >= 90, "follower {id} got only {}", seen.len());
    }
}

#[test]
fn dropped_replies_are_retransmitted_until_acked() {
    let out = exchange(4000, |k| k % 3 == 0);
    let c = out.leader.counters();
    assert_eq!(c.polls, c.responses + c.timeouts);
    assert!(c.timeouts > 0);
    for id in IDS {
        let seen = &out.delivered[&id];
        assert!(seen.windows(2).all(|w| w[0] < w[1]));
        assert!(!seen.is_empty());
        let link = out.leader.follower(id).unwrap().link.estimate();
        assert!((0.5..=0.9).contains(&link), "follower {id} link estimate {link}");
    }
}
