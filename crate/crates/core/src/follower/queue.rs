use std::collections::VecDeque;
use std::sync::{Arc, Mutex, MutexGuard};

use bytes::Bytes;

use crate::aoi::{Duration, Timestamp};

/// A timestamped sensor reading accepted by the middleware.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensorUpdate {
    pub gen_ts: Timestamp,
    pub payload: Bytes,
    pub update_seq: u32,
}

/// Follower-side buffer discipline.
#[derive(Debug, Clone, PartialEq)]
pub enum UpdateQueue {
    /// Single slot; a new update replaces whatever is waiting.
    Lifo1 { slot: Option<SensorUpdate> },
    /// FIFO that admits at most one update per `interval` and holds at most
    /// `capacity` of them.
    FifoRc {
        interval: Duration,
        last_accept: Option<Timestamp>,
        buffer: VecDeque<SensorUpdate>,
        capacity: usize,
    },
}

impl UpdateQueue {
    pub fn lifo() -> Self {
        UpdateQueue::Lifo1 { slot: None }
    }

    pub fn fifo(interval: Duration, capacity: usize) -> Self {
        assert!(capacity > 0, "FIFO capacity must be positive");
        UpdateQueue::FifoRc {
            interval,
            last_accept: None,
            buffer: VecDeque::new(),
            capacity,
        }
    }

    /// Whether an update offered at `now` would be admitted.
    pub fn admits(&self, now: Timestamp) -> bool {
        match self {
            UpdateQueue::Lifo1 { .. } => true,
            UpdateQueue::FifoRc {
                interval,
                last_accept,
                buffer,
                capacity,
            } => last_accept.is_none_or(|last| now >= last + *interval) && buffer.len() < *capacity,
        }
    }

    pub fn offer(&mut self, update: SensorUpdate, now: Timestamp) -> bool {
        if !self.admits(now) {
            return false;
        }
        match self {
            UpdateQueue::Lifo1 { slot } => *slot = Some(update),
            UpdateQueue::FifoRc { last_accept, buffer, .. } => {
                *last_accept = Some(now);
                buffer.push_back(update);
            }
        }
        true
    }

    /// Releases one update for transmission.
    pub fn take(&mut self) -> Option<SensorUpdate> {
        match self {
            UpdateQueue::Lifo1 { slot } => slot.take(),
            UpdateQueue::FifoRc { buffer, .. } => buffer.pop_front(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            UpdateQueue::Lifo1 { slot } => slot.is_some() as usize,
            UpdateQueue::FifoRc { buffer, .. } => buffer.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug)]
struct Admission {
    queue: UpdateQueue,
    next_seq: u32,
    offered: u64,
    accepted: u64,
}

/// Shared handle to a follower's update queue.
///
/// Clones share the queue: the sensing side calls [`UpdateSource::collect`]
/// while the network responder calls [`UpdateSource::take`].
#[derive(Debug, Clone)]
pub struct UpdateSource {
    inner: Arc<Mutex<Admission>>,
}

impl UpdateSource {
    pub fn new(queue: UpdateQueue) -> Self {
        UpdateSource {
            inner: Arc::new(Mutex::new(Admission {
                queue,
                next_seq: 1,
                offered: 0,
                accepted: 0,
            })),
        }
    }

    fn lock(&self) -> MutexGuard<'_, Admission> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Stamps `payload` with `now` and offers it; returns whether it was kept.
    pub fn collect(&self, payload: Bytes, now: Timestamp) -> bool {
        let mut a = self.lock();
        a.offered += 1;
        let update = SensorUpdate {
            gen_ts: now,
            payload,
            update_seq: a.next_seq,
        };
        if a.queue.offer(update, now) {
            a.next_seq = a.next_seq.wrapping_add(1);
            a.accepted += 1;
            true
        } else {
            false
        }
    }

    pub fn take(&self) -> Option<SensorUpdate> {
        self.lock().queue.take()
    }

    pub fn len(&self) -> usize {
        self.lock().queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(offered, accepted)` counts.
    pub fn counts(&self) -> (u64, u64) {
        let a = self.lock();
        (a.offered, a.accepted)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn upd(seq: u32, gen_ms: i64) -> SensorUpdate {
        SensorUpdate {
            gen_ts: Timestamp::from_micros(gen_ms * 1000),
            payload: Bytes::new(),
            update_seq: seq,
        }
    }

    fn ms(v: i64) -> Timestamp {
        Timestamp::from_micros(v * 1000)
    }

    #[test]
    fn lifo_keeps_the_newest() {
        let mut q = UpdateQueue::lifo();
        assert!(q.offer(upd(1, 1), ms(1)));
        assert!(q.offer(upd(2, 2), ms(2)));
        assert_eq!(q.len(), 1);
        assert_eq!(q.take().unwrap().update_seq, 2);
        assert!(q.take().is_none());
    }

    #[test]
    fn fifo_rate_control_drops_between_admissions() {
        let mut q = UpdateQueue::fifo(Duration::from_millis(100), 10);
        assert!(q.offer(upd(1, 0), ms(0)));
        assert!(!q.offer(upd(2, 50), ms(50)));
        assert!(q.offer(upd(3, 120), ms(120)));
        assert_eq!(q.take().unwrap().update_seq, 1);
        assert_eq!(q.take().unwrap().update_seq, 3);
    }

    #[test]
    fn fifo_capacity_bound() {
        let mut q = UpdateQueue::fifo(Duration::ZERO, 2);
        assert!(q.offer(upd(1, 0), ms(0)));
        assert!(q.offer(upd(2, 0), ms(0)));
        assert!(!q.offer(upd(3, 0), ms(0)));
        assert_eq!(q.len(), 2);
    }

    #[test]
    fn source_numbers_only_accepted_updates() {
        let src = UpdateSource::new(UpdateQueue::fifo(Duration::from_millis(10), 10));
        assert!(src.collect(Bytes::new(), ms(0)));
        assert!(!src.collect(Bytes::new(), ms(5)));
        assert!(src.collect(Bytes::new(), ms(10)));
        assert_eq!(src.take().unwrap().update_seq, 1);
        assert_eq!(src.take().unwrap().update_seq, 2);
        assert_eq!(src.counts(), (3, 2));
    }

    #[test]
    fn producer_and_consumer_threads() {
        let src = UpdateSource::new(UpdateQueue::lifo());
        let producer = src.clone();
        let handle = std::thread::spawn(move || {
            for k in 0..10_000i64 {
                producer.collect(Bytes::new(), Timestamp::from_micros(k));
            }
        });
        let mut last = 0;
        let mut taken = 0;
        while !handle.is_finished() || !src.is_empty() {
            if let Some(u) = src.take() {
                assert!(u.update_seq > last);
                last = u.update_seq;
                taken += 1;
            }
        }
        handle.join().unwrap();
        assert!(taken >= 1);
    }

    proptest! {
        #[test]
        fn lifo_holds_max_generation(gens in prop::collection::vec(0i64..1_000, 1..50)) {
            let src = UpdateSource::new(UpdateQueue::lifo());
            let mut t = 0i64;
            let mut newest = None;
            for g in gens {
                t += g;
                src.collect(Bytes::new(), Timestamp::from_micros(t));
                newest = Some(Timestamp::from_micros(t));
            }
            prop_assert_eq!(src.take().map(|u| u.gen_ts), newest);
        }

        #[test]
        fn rate_bound(interval_ms in 1i64..200, offsets in prop::collection::vec(0i64..50_000, 1..300), window_ms in 1i64..5_000) {
            let mut times: Vec<i64> = offsets;
            times.sort_unstable();
            let mut q = UpdateQueue::fifo(Duration::from_millis(interval_ms), usize::MAX);
            let mut accepted = Vec::new();
            for (i, &t) in times.iter().enumerate() {
                if q.offer(upd(i as u32, 0), Timestamp::from_micros(t * 1000)) {
                    accepted.push(t * 1000);
                }
            }
            let bound = (window_ms as f64 / interval_ms as f64).ceil() as usize + 1;
            for (i, &start) in accepted.iter().enumerate() {
                let in_window = accepted[i..].iter().take_while(|&&t| t <= start + window_ms * 1000).count();
                prop_assert!(in_window <= bound);
            }
        }
    }
}
