use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SchedulerError;

/// Scheduling inputs for one follower.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FollowerView {
    pub id: u16,
    /// Age in seconds.
    pub age: f64,
    pub reliability: f64,
    pub weight: f64,
    pub eligible: bool,
}

impl FollowerView {
    pub fn new(id: u16, age: f64, reliability: f64, weight: f64) -> Self {
        FollowerView { id, age, reliability, weight, eligible: true }
    }

    pub fn whittle_index(&self) -> f64 {
        self.weight * self.reliability * self.age * self.age
    }
}

/// Snapshot handed to a policy at a decision time.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SchedulerView {
    pub followers: Vec<FollowerView>,
}

impl SchedulerView {
    pub fn new(followers: Vec<FollowerView>) -> Self {
        SchedulerView { followers }
    }

    fn eligible(&self) -> impl Iterator<Item = &FollowerView> {
        self.followers.iter().filter(|f| f.eligible)
    }
}

/// Argmax over eligible followers of `key`, lowest id on ties.
fn argmax_by(view: &SchedulerView, key: impl Fn(&FollowerView) -> f64) -> Result<u16, SchedulerError> {
    let mut best: Option<(u16, f64)> = None;
    for f in view.eligible() {
        let k = key(f);
        best = match best {
            Some((id, b)) if b > k || (b == k && id < f.id) => Some((id, b)),
            _ => Some((f.id, k)),
        };
    }
    best.map(|(id, _)| id).ok_or(SchedulerError::NoEligible)
}

/// Picks the eligible follower maximising `w p A^2`.
pub fn whittle_select(view: &SchedulerView) -> Result<u16, SchedulerError> {
    if let Some(bad) = view.eligible().find(|f| !(f.reliability > 0.0)) {
        return Err(SchedulerError::NonPositiveReliability(bad.id));
    }
    argmax_by(view, FollowerView::whittle_index)
}

pub fn max_age_select(view: &SchedulerView) -> Result<u16, SchedulerError> {
    argmax_by(view, |f| f.age)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Whittle,
    MaxAge,
    RoundRobin,
    Random,
}

impl PolicyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Whittle => "whittle",
            PolicyKind::MaxAge => "maxage",
            PolicyKind::RoundRobin => "roundrobin",
            PolicyKind::Random => "random",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = SchedulerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "whittle" => Ok(PolicyKind::Whittle),
            "maxage" => Ok(PolicyKind::MaxAge),
            "roundrobin" => Ok(PolicyKind::RoundRobin),
            "random" => Ok(PolicyKind::Random),
            other => Err(SchedulerError::UnknownPolicy(other.to_string())),
        }
    }
}

/// A policy together with whatever state it carries between decisions.
#[derive(Debug, Clone)]
pub enum Policy {
    Whittle,
    MaxAge,
    RoundRobin { last_served: Option<u16> },
    UniformRandom { rng: ChaCha8Rng },
}

impl Policy {
    pub fn new(kind: PolicyKind, seed: u64) -> Self {
        match kind {
            PolicyKind::Whittle => Policy::Whittle,
            PolicyKind::MaxAge => Policy::MaxAge,
            PolicyKind::RoundRobin => Policy::RoundRobin { last_served: None },
            PolicyKind::Random => Policy::UniformRandom {
                rng: ChaCha8Rng::seed_from_u64(seed),
            },
        }
    }

    pub fn kind(&self) -> PolicyKind {
        match self {
            Policy::Whittle => PolicyKind::Whittle,
            Policy::MaxAge => PolicyKind::MaxAge,
            Policy::RoundRobin { .. } => PolicyKind::RoundRobin,
            Policy::UniformRandom { .. } => PolicyKind::Random,
        }
    }

    pub fn select(&mut self, view: &SchedulerView) -> Result<u16, SchedulerError> {
        match self {
            Policy::Whittle => whittle_select(view),
            Policy::MaxAge => max_age_select(view),
            Policy::RoundRobin { last_served } => {
                let mut ids: Vec<u16> = view.eligible().map(|f| f.id).collect();
                ids.sort_unstable();
                let first = *ids.first().ok_or(SchedulerError::NoEligible)?;
                let next = match *last_served {
                    Some(last) => ids.iter().copied().find(|&id| id > last).unwrap_or(first),
                    None => first,
                };
                *last_served = Some(next);
                Ok(next)
            }
            Policy::UniformRandom { rng } => {
                let mut ids: Vec<u16> = view.eligible().map(|f| f.id).collect();
                if ids.is_empty() {
                    return Err(SchedulerError::NoEligible);
                }
                ids.sort_unstable();
                Ok(ids[rng.random_range(0..ids.len())])
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn view(entries: &[(u16, f64, f64, f64)]) -> SchedulerView {
        SchedulerView::new(
            entries
                .iter()
                .map(|&(id, w, p, a)| FollowerView::new(id, a, p, w))
                .collect(),
        )
    }

    #[test]
    fn whittle_examples() {
        assert_eq!(whittle_select(&view(&[(1, 1.0, 1.0, 2.0), (2, 1.0, 1.0, 1.0)])).unwrap(), 1);
        assert_eq!(whittle_select(&view(&[(1, 1.0, 0.5, 2.0), (2, 1.0, 1.0, 1.5)])).unwrap(), 2);
        assert_eq!(whittle_select(&view(&[(1, 1.0, 1.0, 1.0), (2, 1.0, 1.0, 1.0)])).unwrap(), 1);
    }

    #[test]
    fn ties_go_to_lowest_id_regardless_of_order() {
        let v = view(&[(5, 1.0, 1.0, 1.0), (3, 1.0, 1.0, 1.0), (9, 1.0, 1.0, 1.0)]);
        assert_eq!(whittle_select(&v).unwrap(), 3);
    }

    #[test]
    fn empty_or_ineligible_is_rejected() {
        assert_eq!(whittle_select(&SchedulerView::default()), Err(SchedulerError::NoEligible));
        let mut v = view(&[(1, 1.0, 1.0, 3.0)]);
        v.followers[0].eligible = false;
        assert_eq!(Policy::new(PolicyKind::RoundRobin, 0).select(&v), Err(SchedulerError::NoEligible));
        assert_eq!(Policy::new(PolicyKind::Random, 0).select(&v), Err(SchedulerError::NoEligible));
    }

    #[test]
    fn ineligible_followers_are_skipped() {
        let mut v = view(&[(1, 1.0, 1.0, 9.0), (2, 1.0, 1.0, 1.0)]);
        v.followers[0].eligible = false;
        assert_eq!(whittle_select(&v).unwrap(), 2);
    }

    #[test]
    fn zero_reliability_is_rejected() {
        let v = view(&[(1, 1.0, 0.0, 1.0)]);
        assert_eq!(whittle_select(&v), Err(SchedulerError::NonPositiveReliability(1)));
    }

    #[test]
    fn round_robin_cycles_and_wraps() {
        let v = view(&[(1, 1.0, 1.0, 1.0), (2, 1.0, 1.0, 1.0), (3, 1.0, 1.0, 1.0)]);
        let mut p = Policy::RoundRobin { last_served: Some(2) };
        assert_eq!(p.select(&v).unwrap(), 3);
        assert_eq!(p.select(&v).unwrap(), 1);
        let mut fresh = Policy::new(PolicyKind::RoundRobin, 0);
        let picks: Vec<u16> = (0..5).map(|_| fresh.select(&v).unwrap()).collect();
        assert_eq!(picks, vec![1, 2, 3, 1, 2]);
    }

    #[test]
    fn max_age_example() {
        let v = view(&[(1, 1.0, 1.0, 5.0), (2, 1.0, 1.0, 7.0)]);
        assert_eq!(Policy::new(PolicyKind::MaxAge, 0).select(&v).unwrap(), 2);
    }

    #[test]
    fn seeded_random_is_deterministic() {
        let v = view(&[(1, 1.0, 1.0, 1.0), (2, 1.0, 1.0, 1.0), (3, 1.0, 1.0, 1.0)]);
        let mut a = Policy::new(PolicyKind::Random, 42);
        let mut b = Policy::new(PolicyKind::Random, 42);
        let pa: Vec<u16> = (0..50).map(|_| a.select(&v).unwrap()).collect();
        let pb: Vec<u16> = (0..50).map(|_| b.select(&v).unwrap()).collect();
        assert_eq!(pa, pb);
        assert!(pa.contains(&1) && pa.contains(&2) && pa.contains(&3));
    }

    #[test]
    fn policy_names_round_trip() {
        for k in [PolicyKind::Whittle, PolicyKind::MaxAge, PolicyKind::RoundRobin, PolicyKind::Random] {
            assert_eq!(k.as_str().parse::<PolicyKind>().unwrap(), k);
        }
        assert!("fifo".parse::<PolicyKind>().is_err());
    }

    fn arb_view() -> impl Strategy<Value = SchedulerView> {
        prop::collection::vec((0.0f64..10.0, 0.05f64..=1.0, 0.0f64..30.0), 1..16).prop_map(|rows| {
            SchedulerView::new(
                rows.into_iter()
                    .enumerate()
                    .map(|(i, (w, p, a))| FollowerView::new(i as u16 + 1, a, p, w))
                    .collect(),
            )
        })
    }

    proptest! {
        #[test]
        fn scaling_weights_or_reliabilities_keeps_the_choice(v in arb_view(), c in prop::sample::select(vec![0.1, 10.0])) {
            let base = whittle_select(&v).unwrap();
            let mut w = v.clone();
            w.followers.iter_mut().for_each(|f| f.weight *= c);
            prop_assert_eq!(whittle_select(&w).unwrap(), base);
            let mut p = v.clone();
            p.followers.iter_mut().for_each(|f| f.reliability = (f.reliability * c).max(f64::MIN_POSITIVE));
            prop_assert_eq!(whittle_select(&p).unwrap(), base);
        }

        #[test]
        fn uniform_weights_reduce_to_max_age(v in arb_view(), w in 0.1f64..5.0, p in 0.05f64..=1.0) {
            let mut u = v.clone();
            u.followers.iter_mut().for_each(|f| { f.weight = w; f.reliability = p; });
            prop_assert_eq!(whittle_select(&u).unwrap(), max_age_select(&u).unwrap());
        }
    }
}
