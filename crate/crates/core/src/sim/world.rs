use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::aoi::{Duration, Timestamp};
use crate::follower::ControlStore;
use crate::leader::Observation;
use crate::wire::Waypoint;

use super::TrackingConfig;

/// Ground target doing a random walk with occasional stops.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetModel {
    pub position: [f64; 2],
    pub velocity: [f64; 2],
    /// Seconds until the next speed/heading draw.
    pub until_resample: f64,
    pub paused: bool,
}

impl TargetModel {
    pub fn at_rest(position: [f64; 2]) -> Self {
        TargetModel {
            position,
            velocity: [0.0, 0.0],
            until_resample: 0.0,
            paused: false,
        }
    }

    pub fn speed(&self) -> f64 {
        if self.paused {
            0.0
        } else {
            self.velocity[0].hypot(self.velocity[1])
        }
    }

    /// Draws a new velocity (or a pause) for the next resample period.
    pub fn resample(&mut self, cfg: &TrackingConfig, rng: &mut ChaCha8Rng) {
        self.paused = rng.random::<f64>() < cfg.pause_prob;
        let speed = rng.random::<f64>() * cfg.target_max_speed;
        let heading = rng.random::<f64>() * TAU;
        self.velocity = [speed * heading.cos(), speed * heading.sin()];
        self.until_resample += cfg.resample_period.as_secs_f64();
    }
}

/// Advances a target by `dt` seconds, reflecting off the arena walls.
pub fn step_target(target: &mut TargetModel, dt: f64, cfg: &TrackingConfig, rng: &mut ChaCha8Rng) {
    if !target.paused {
        for axis in 0..2 {
            let extent = cfg.arena[axis];
            let mut p = target.position[axis] + target.velocity[axis] * dt;
            if p < 0.0 {
                p = -p;
                target.velocity[axis] = -target.velocity[axis];
            } else if p > extent {
                p = 2.0 * extent - p;
                target.velocity[axis] = -target.velocity[axis];
            }
            target.position[axis] = p.clamp(0.0, extent);
        }
    }
    target.until_resample -= dt;
    while target.until_resample <= 1e-12 {
        target.resample(cfg, rng);
    }
}

/// Moves an agent toward its next waypoint for `dt` seconds.
///
/// The goal is the first waypoint due at or after `now` (or the last one if
/// all are overdue); speed is what reaches it on time, capped at `max_speed`.
pub fn step_follower_agent(agent: &mut [f64; 3], waypoints: &[Waypoint], now: Timestamp, dt: f64, max_speed: f64) {
    let Some(goal) = waypoints.iter().find(|w| w.t >= now).or(waypoints.last()) else {
        return;
    };
    let delta = [goal.x - agent[0], goal.y - agent[1], goal.z - agent[2]];
    let dist = (delta[0] * delta[0] + delta[1] * delta[1] + delta[2] * delta[2]).sqrt();
    if dist == 0.0 {
        return;
    }
    let remaining = (goal.t - now).as_secs_f64();
    let speed = if remaining > 0.0 { (dist / remaining).min(max_speed) } else { max_speed };
    let travel = (speed * dt).min(dist);
    for k in 0..3 {
        agent[k] += delta[k] / dist * travel;
    }
}

fn ground_distance(agent: &[f64; 3], target: &[f64; 2]) -> f64 {
    (agent[0] - target[0]).hypot(agent[1] - target[1])
}

/// Camera model: the target is seen iff it lies within the closed FoV disc.
pub fn observe(agent: &[f64; 3], target: &TargetModel, fov_radius: f64, gen_ts: Timestamp) -> Observation {
    let seen = ground_distance(agent, &target.position) <= fov_radius;
    Observation {
        target: seen.then_some(target.position),
        agent: *agent,
        gen_ts,
    }
}

/// Targets, the agents assigned to them, and running error statistics.
#[derive(Debug, Clone)]
pub struct TrackingWorld {
    cfg: TrackingConfig,
    t: Timestamp,
    rng: ChaCha8Rng,
    pub targets: Vec<TargetModel>,
    pub agents: Vec<[f64; 3]>,
    error_sum: Vec<f64>,
    outside: Vec<u64>,
    samples: u64,
}

impl TrackingWorld {
    pub fn new(cfg: TrackingConfig, n: usize, start: Timestamp, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut targets = Vec::with_capacity(n);
        let mut agents = Vec::with_capacity(n);
        for _ in 0..n {
            let pos = [rng.random::<f64>() * cfg.arena[0], rng.random::<f64>() * cfg.arena[1]];
            let mut target = TargetModel::at_rest(pos);
            target.resample(&cfg, &mut rng);
            targets.push(target);
            agents.push([pos[0], pos[1], cfg.altitude]);
        }
        TrackingWorld {
            cfg,
            t: start,
            rng,
            targets,
            agents,
            error_sum: vec![0.0; n],
            outside: vec![0; n],
            samples: 0,
        }
    }

    pub fn config(&self) -> &TrackingConfig {
        &self.cfg
    }

    pub fn time(&self) -> Timestamp {
        self.t
    }

    /// Steps the world on its sampling grid up to `until`. `control(i)` gives
    /// follower `i`'s waypoints and its clock offset.
    pub fn advance_to<'a>(&mut self, until: Timestamp, control: impl Fn(usize) -> (&'a ControlStore, Duration)) {
        let step = self.cfg.sample_step;
        let dt = step.as_secs_f64();
        while self.t + step <= until {
            let now = self.t + step;
            for i in 0..self.targets.len() {
                step_target(&mut self.targets[i], dt, &self.cfg, &mut self.rng);
                if self.cfg.closed_loop {
                    let (store, offset) = control(i);
                    step_follower_agent(
                        &mut self.agents[i],
                        store.waypoints(),
                        now + offset,
                        dt,
                        self.cfg.follower_max_speed,
                    );
                }
                let err = ground_distance(&self.agents[i], &self.targets[i].position);
                self.error_sum[i] += err;
                if err > self.cfg.fov_radius {
                    self.outside[i] += 1;
                }
            }
            self.samples += 1;
            self.t = now;
        }
    }

    /// What follower `i`'s camera sees right now, stamped with `gen_ts`.
    pub fn observe(&self, i: usize, gen_ts: Timestamp) -> Observation {
        observe(&self.agents[i], &self.targets[i], self.cfg.fov_radius, gen_ts)
    }

    pub fn mean_error(&self, i: usize) -> Option<f64> {
        (self.samples > 0).then(|| self.error_sum[i] / self.samples as f64)
    }

    pub fn outside_fraction(&self, i: usize) -> Option<f64> {
        (self.samples > 0).then(|| self.outside[i] as f64 / self.samples as f64)
    }
}
