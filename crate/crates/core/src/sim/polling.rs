use crate::aoi::Timestamp;
use crate::leader::{AppOutput, Application, CompletedUpdate, Leader, LeaderLoop, NullApp, TrackingProcessor};
use crate::wire::Transport;

use super::network::SimNetwork;
use super::report::{build_report, RunInfo};
use super::{MetricsReport, SimConfig, SimError, System};

#[derive(Debug)]
pub(crate) enum SimApp {
    Null(NullApp),
    Tracking(TrackingProcessor),
}

impl SimApp {
    pub fn for_config(config: &SimConfig) -> Self {
        match config.tracking {
            Some(_) => SimApp::Tracking(TrackingProcessor::new(
                config.leader.waypoint_horizon,
                config.leader.waypoint_count,
            )),
            None => SimApp::Null(NullApp),
        }
    }
}

impl Application for SimApp {
    fn on_update(&mut self, update: &CompletedUpdate) -> AppOutput {
        match self {
            SimApp::Null(a) => a.on_update(update),
            SimApp::Tracking(a) => a.on_update(update),
        }
    }
}

/// Runs the full leader/follower middleware over the simulated network.
pub fn run_polling_sim(config: &SimConfig) -> Result<MetricsReport, SimError> {
    config.validate()?;
    let net = SimNetwork::new(config)?;
    let mut leader_config = config.leader.clone();
    leader_config.seed = config.seed;
    let leader = Leader::new(leader_config)?;
    let mut lp = LeaderLoop::new(net, leader, SimApp::for_config(config));
    for id in 1..=config.n {
        lp.add_follower(id, id)?;
    }
    lp.run_until(Timestamp::ZERO + config.duration)?;
    let (mut net, mut leader, _) = lp.into_parts();
    let stop = net.now();
    net.advance_world(stop);
    let counters = leader.counters();
    let metrics = leader.finish(stop)?;
    let generated: Vec<u64> = (1..=config.n).map(|id| net.generated(id)).collect();
    let info = RunInfo {
        system: System::Polling,
        policy: config.leader.policy,
        n: config.n,
        rate_fps: config.rate_fps,
        seed: config.seed,
        attempts: counters.polls,
        timeouts: counters.timeouts,
        collisions: 0,
    };
    Ok(build_report(info, metrics, &generated, net.world())?)
}
