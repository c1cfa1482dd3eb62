//! Deterministic discrete-event simulation of the middleware, a slotted
//! random-access baseline and a mobility-tracking scenario.

mod baseline;
mod config;
mod network;
mod polling;
mod report;
mod world;

use thiserror::Error;

use crate::aoi::AoiError;
use crate::follower::FollowerError;
use crate::leader::LeaderError;
use crate::scheduler::SchedulerError;
use crate::wire::EncodeError;

pub use baseline::run_random_access_baseline;
pub use config::{Generation, QueueKind, SimConfig, System, TrackingConfig};
pub use network::SimNetwork;
pub use polling::run_polling_sim;
pub use report::{FollowerReport, MetricsReport};
pub use world::{observe, step_follower_agent, step_target, TargetModel, TrackingWorld};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("simulator invariant broken: {0}")]
    Internal(&'static str),
    #[error(transparent)]
    Leader(#[from] LeaderError),
    #[error(transparent)]
    Follower(#[from] FollowerError),
    #[error(transparent)]
    Scheduler(#[from] SchedulerError),
    #[error(transparent)]
    Aoi(#[from] AoiError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
}

/// Runs whichever system `config` selects.
pub fn run(config: &SimConfig) -> Result<MetricsReport, SimError> {
    match config.system {
        System::Polling => run_polling_sim(config),
        System::RandomAccess => run_random_access_baseline(config),
    }
}
