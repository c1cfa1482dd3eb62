use std::collections::BTreeMap;

use bytes::{BufMut, Bytes, BytesMut};

use crate::aoi::{Duration, Timestamp};
use crate::wire::Waypoint;

use super::{AppOutput, Application, CompletedUpdate};

/// What a follower's camera saw in one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    /// Target ground position, if it was in view.
    pub target: Option<[f64; 2]>,
    pub agent: [f64; 3],
    pub gen_ts: Timestamp,
}

/// Encoded size before padding.
pub const OBSERVATION_LEN: usize = 1 + 2 * 8 + 3 * 8 + 8;

impl Observation {
    /// Encodes and zero-pads to at least `frame_bytes`.
    pub fn encode(&self, frame_bytes: usize) -> Bytes {
        let mut out = BytesMut::with_capacity(frame_bytes.max(OBSERVATION_LEN));
        let [tx, ty] = self.target.unwrap_or([0.0, 0.0]);
        out.put_u8(self.target.is_some() as u8);
        out.put_f64(tx);
        out.put_f64(ty);
        for v in self.agent {
            out.put_f64(v);
        }
        out.put_i64(self.gen_ts.as_micros());
        out.resize(frame_bytes.max(OBSERVATION_LEN), 0);
        out.freeze()
    }

    pub fn decode(bytes: &[u8]) -> Option<Self> {
        if bytes.len() < OBSERVATION_LEN || bytes[0] > 1 {
            return None;
        }
        let f = |k: usize| f64::from_be_bytes(bytes[1 + 8 * k..9 + 8 * k].try_into().unwrap());
        let gen = i64::from_be_bytes(bytes[41..49].try_into().unwrap());
        Some(Observation {
            target: (bytes[0] == 1).then(|| [f(0), f(1)]),
            agent: [f(2), f(3), f(4)],
            gen_ts: Timestamp::from_micros(gen),
        })
    }
}

#[derive(Debug, Clone, Default)]
struct TrackState {
    prev: Option<([f64; 2], Timestamp)>,
    cur: Option<([f64; 2], Timestamp)>,
    velocity: Option<[f64; 2]>,
    agent_prev: Option<([f64; 2], Timestamp)>,
    agent_velocity: [f64; 2],
}

/// Turns observations into waypoints by linear extrapolation and reports the
/// target speed relative to the follower.
#[derive(Debug, Clone)]
pub struct TrackingProcessor {
    horizon: Duration,
    count: usize,
    states: BTreeMap<u16, TrackState>,
}

impl TrackingProcessor {
    pub fn new(horizon: Duration, count: usize) -> Self {
        assert!(count > 0 && horizon > Duration::ZERO);
        TrackingProcessor {
            horizon,
            count,
            states: BTreeMap::new(),
        }
    }

    /// Processes one observation; `gen_ts` is the frame time on the leader clock.
    pub fn process(&mut self, follower: u16, obs: &Observation, gen_ts: Timestamp) -> AppOutput {
        let st = self.states.entry(follower).or_default();
        let agent_xy = [obs.agent[0], obs.agent[1]];
        if let Some((p, t)) = st.agent_prev {
            let dt = (gen_ts - t).as_secs_f64();
            if dt > 0.0 {
                st.agent_velocity = [(agent_xy[0] - p[0]) / dt, (agent_xy[1] - p[1]) / dt];
            }
        }
        st.agent_prev = Some((agent_xy, gen_ts));

        let Some(p_cur) = obs.target else {
            return AppOutput::default();
        };
        st.prev = st.cur.replace((p_cur, gen_ts));
        let Some((p_prev, t_prev)) = st.prev else {
            return AppOutput {
                waypoints: None,
                relative_speed: Some(0.0),
            };
        };
        let dt = (gen_ts - t_prev).as_secs_f64();
        if dt > 0.0 {
            st.velocity = Some([(p_cur[0] - p_prev[0]) / dt, (p_cur[1] - p_prev[1]) / dt]);
        }
        let Some(v) = st.velocity else {
            return AppOutput::default();
        };
        let step = Duration::from_micros(self.horizon.as_micros() / self.count as i64);
        let waypoints = (1..=self.count)
            .map(|k| {
                let lead = (step.as_micros() * k as i64) as f64 / 1e6;
                Waypoint {
                    t: gen_ts + Duration::from_micros(step.as_micros() * k as i64),
                    x: p_cur[0] + v[0] * lead,
                    y: p_cur[1] + v[1] * lead,
                    z: obs.agent[2],
                }
            })
            .collect();
        let rel = [v[0] - st.agent_velocity[0], v[1] - st.agent_velocity[1]];
        AppOutput {
            waypoints: Some(waypoints),
            relative_speed: Some(rel[0].hypot(rel[1])),
        }
    }
}

impl Application for TrackingProcessor {
    fn on_update(&mut self, update: &CompletedUpdate) -> AppOutput {
        match Observation::decode(&update.payload) {
            Some(obs) => self.process(update.follower, &obs, update.gen_ts),
            None => AppOutput::default(),
        }
    }
}
