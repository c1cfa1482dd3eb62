//! Follower-side middleware: update admission, fragmentation, poll response
//! and control intake.

mod control;
mod fragment;
mod node;
mod queue;

use thiserror::Error;

pub use control::ControlStore;
pub use fragment::{fragment_update, DEFAULT_MAX_PAYLOAD};
pub use node::{FollowerNode, FollowerStats, Reply};
pub use queue::{SensorUpdate, UpdateQueue, UpdateSource};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FollowerError {
    #[error("max payload {0} outside 1..=65535")]
    BadMaxPayload(usize),
    #[error("update needs {0} fragments, more than 65535")]
    TooManyFragments(usize),
}
