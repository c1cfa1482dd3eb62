//! Leader-side middleware: polling, reassembly, per-follower age, link and
//! weight state, control broadcast and clock synchronisation.

mod driver;
mod reassembly;
mod state;
mod tracking;

use thiserror::Error;

use crate::aoi::{AoiError, Duration, Timestamp};
use crate::scheduler::SchedulerError;
use crate::wire::EncodeError;

pub use driver::{EpochOutcome, LeaderLoop, LEADER_ID};
pub use reassembly::{Insert, Reassembly};
pub use state::{
    AppOutput, Application, CompletedUpdate, FollowerCounters, FollowerEntry, Leader, LeaderConfig, LeaderCounters,
    NullApp,
};
pub use tracking::{Observation, TrackingProcessor, OBSERVATION_LEN};

#[derive(Debug, Error)]
pub enum LeaderError {
    #[error("invalid leader configuration: {0}")]
    BadConfig(&'static str),
    #[error("follower {0} is not registered")]
    UnknownFollower(u16),
    #[error("follower {0} is already registered")]
    DuplicateFollower(u16),
    #[error("a poll is already outstanding")]
    PollOutstanding,
    #[error("no poll is outstanding")]
    NothingOutstanding,
    #[error(transparent)]
    Scheduler(#[from] SchedulerError),
    #[error(transparent)]
    Aoi(#[from] AoiError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error("transport: {0}")]
    Io(#[from] std::io::Error),
}

/// Follower clock minus leader clock from one request/response exchange:
/// `t1` leader send, `t2` follower receive, `t3` follower send, `t4` leader
/// receive.
pub fn clock_offset(t1: Timestamp, t2: Timestamp, t3: Timestamp, t4: Timestamp) -> Duration {
    Duration::from_micros(((t2 - t1).as_micros() + (t3 - t4).as_micros()) / 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(v: i64) -> Timestamp {
        Timestamp::from_micros(v)
    }

    #[test]
    fn offset_examples() {
        assert_eq!(clock_offset(ts(0), ts(105), ts(106), ts(11)), Duration::from_micros(100));
        // no skew, 5 ms each way
        assert_eq!(clock_offset(ts(0), ts(5_000), ts(5_000), ts(10_000)), Duration::ZERO);
    }

    #[test]
    fn asymmetry_error_is_half_the_difference() {
        // 2 ms out, 8 ms back, true offset 0
        let off = clock_offset(ts(0), ts(2_000), ts(2_000), ts(10_000));
        assert_eq!(off.as_micros().abs(), 3_000);
    }
}
