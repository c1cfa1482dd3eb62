use std::collections::BTreeMap;

use bytes::{Bytes, BytesMut};

use crate::aoi::Timestamp;
use crate::wire::Fragment;

/// Fragments of one update collected so far.
#[derive(Debug, Clone, PartialEq)]
pub struct Reassembly {
    pub update_seq: u32,
    pub frag_count: u16,
    pub gen_ts: Timestamp,
    parts: BTreeMap<u16, Bytes>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Insert {
    Pending,
    Duplicate,
    Complete(Bytes),
}

impl Reassembly {
    pub fn start(frag: &Fragment) -> Self {
        Reassembly {
            update_seq: frag.update_seq,
            frag_count: frag.frag_count,
            gen_ts: frag.gen_ts,
            parts: BTreeMap::new(),
        }
    }

    pub fn received(&self) -> usize {
        self.parts.len()
    }

    /// Adds `frag`, which must belong to this update and have a valid index.
    pub fn insert(&mut self, frag: &Fragment) -> Insert {
        debug_assert_eq!(frag.update_seq, self.update_seq);
        debug_assert!(frag.frag_index < self.frag_count);
        if self.parts.contains_key(&frag.frag_index) {
            return Insert::Duplicate;
        }
        self.parts.insert(frag.frag_index, frag.payload.clone());
        if self.parts.len() < self.frag_count as usize {
            return Insert::Pending;
        }
        let total = self.parts.values().map(Bytes::len).sum();
        let mut out = BytesMut::with_capacity(total);
        for part in self.parts.values() {
            out.extend_from_slice(part);
        }
        Insert::Complete(out.freeze())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::follower::{fragment_update, SensorUpdate};
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn frags(len: usize, max: usize) -> (Bytes, Vec<Fragment>) {
        let payload = Bytes::from((0..len).map(|i| (i * 7 % 256) as u8).collect::<Vec<_>>());
        let update = SensorUpdate {
            gen_ts: Timestamp::from_micros(1),
            payload: payload.clone(),
            update_seq: 3,
        };
        (payload, fragment_update(&update, max).unwrap())
    }

    #[test]
    fn completes_on_last_index() {
        let (payload, fs) = frags(30, 10);
        let mut r = Reassembly::start(&fs[0]);
        assert_eq!(r.insert(&fs[0]), Insert::Pending);
        assert_eq!(r.insert(&fs[1]), Insert::Pending);
        assert_eq!(r.insert(&fs[2]), Insert::Complete(payload));
    }

    #[test]
    fn duplicate_is_ignored() {
        let (payload, fs) = frags(30, 10);
        let mut r = Reassembly::start(&fs[0]);
        r.insert(&fs[0]);
        r.insert(&fs[1]);
        assert_eq!(r.insert(&fs[1]), Insert::Duplicate);
        assert_eq!(r.received(), 2);
        assert_eq!(r.insert(&fs[2]), Insert::Complete(payload));
    }

    proptest! {
        #[test]
        fn shuffled_with_duplicates_is_identity(len in 0usize..65_536, max in 500usize..9_000, seed in any::<u64>()) {
            let (payload, fs) = frags(len, max);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut order: Vec<&Fragment> = fs.iter().collect();
            for _ in 0..rng.random_range(0..=fs.len()) {
                order.push(&fs[rng.random_range(0..fs.len())]);
            }
            order.shuffle(&mut rng);
            let mut r = Reassembly::start(order[0]);
            let mut done = None;
            for f in order {
                if let Insert::Complete(b) = r.insert(f) {
                    prop_assert!(done.is_none());
                    done = Some(b);
                }
            }
            prop_assert_eq!(done, Some(payload));
        }
    }
}
