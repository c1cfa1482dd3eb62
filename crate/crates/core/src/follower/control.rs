use crate::aoi::Timestamp;
use crate::wire::{ControlEntry, Waypoint};

/// Latest waypoints received from the leader.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ControlStore {
    waypoints: Vec<Waypoint>,
    last_control_ts: Option<Timestamp>,
}

impl ControlStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn waypoints(&self) -> &[Waypoint] {
        &self.waypoints
    }

    pub fn last_control_ts(&self) -> Option<Timestamp> {
        self.last_control_ts
    }

    /// Replaces the stored waypoints iff `control_ts` is newer than the last
    /// applied control. Lists whose times are not strictly increasing are
    /// ignored. Returns whether the store changed.
    pub fn apply(&mut self, waypoints: &[Waypoint], control_ts: Timestamp) -> bool {
        if self.last_control_ts.is_some_and(|last| control_ts <= last) {
            return false;
        }
        if waypoints.windows(2).any(|w| w[1].t <= w[0].t) {
            return false;
        }
        self.waypoints = waypoints.to_vec();
        self.last_control_ts = Some(control_ts);
        true
    }

    /// Applies a broadcast entry. Its control time is the time of its first
    /// waypoint, which advances with every newer update the leader processes.
    pub fn apply_entry(&mut self, entry: &ControlEntry) -> bool {
        match entry.waypoints.first() {
            Some(first) => self.apply(&entry.waypoints, first.t),
            None => false,
        }
    }

    /// Target position at `t`, interpolated linearly between waypoints and
    /// clamped at both ends.
    pub fn position_at(&self, t: Timestamp) -> Option<[f64; 3]> {
        let first = self.waypoints.first()?;
        let last = self.waypoints.last()?;
        if t <= first.t {
            return Some([first.x, first.y, first.z]);
        }
        if t >= last.t {
            return Some([last.x, last.y, last.z]);
        }
        let k = self.waypoints.partition_point(|w| w.t <= t);
        let (a, b) = (&self.waypoints[k - 1], &self.waypoints[k]);
        let f = (t - a.t).as_secs_f64() / (b.t - a.t).as_secs_f64();
        Some([a.x + f * (b.x - a.x), a.y + f * (b.y - a.y), a.z + f * (b.z - a.z)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(v: i64) -> Timestamp {
        Timestamp::from_micros(v)
    }

    fn wps(times: &[i64]) -> Vec<Waypoint> {
        times
            .iter()
            .map(|&t| Waypoint {
                t: ts(t),
                x: t as f64,
                y: 0.0,
                z: 1.0,
            })
            .collect()
    }

    #[test]
    fn empty_store_accepts_first_control() {
        let mut s = ControlStore::new();
        assert!(s.apply(&wps(&[6, 7, 8]), ts(5)));
        assert_eq!(s.waypoints().len(), 3);
        assert_eq!(s.last_control_ts(), Some(ts(5)));
    }

    #[test]
    fn stale_control_ignored() {
        let mut s = ControlStore::new();
        s.apply(&wps(&[11]), ts(10));
        assert!(!s.apply(&wps(&[8, 9]), ts(7)));
        assert_eq!(s.waypoints(), &wps(&[11])[..]);
    }

    #[test]
    fn in_order_broadcasts_keep_the_last() {
        let mut s = ControlStore::new();
        s.apply(&wps(&[6]), ts(5));
        s.apply(&wps(&[7, 8]), ts(6));
        assert_eq!(s.last_control_ts(), Some(ts(6)));
        assert_eq!(s.waypoints(), &wps(&[7, 8])[..]);
    }

    #[test]
    fn non_increasing_waypoints_rejected() {
        let mut s = ControlStore::new();
        assert!(!s.apply(&wps(&[3, 3]), ts(1)));
        assert_eq!(s.last_control_ts(), None);
    }

    #[test]
    fn entry_uses_first_waypoint_time() {
        let mut s = ControlStore::new();
        let entry = ControlEntry {
            follower: 1,
            waypoints: wps(&[20, 30]),
        };
        assert!(s.apply_entry(&entry));
        assert!(!s.apply_entry(&entry));
        assert!(!s.apply_entry(&ControlEntry {
            follower: 1,
            waypoints: vec![]
        }));
        assert_eq!(s.last_control_ts(), Some(ts(20)));
    }

    #[test]
    fn interpolation() {
        let mut s = ControlStore::new();
        assert_eq!(s.position_at(ts(0)), None);
        s.apply(&wps(&[10, 20]), ts(10));
        assert_eq!(s.position_at(ts(0)), Some([10.0, 0.0, 1.0]));
        assert_eq!(s.position_at(ts(15)), Some([15.0, 0.0, 1.0]));
        assert_eq!(s.position_at(ts(99)), Some([20.0, 0.0, 1.0]));
    }
}
