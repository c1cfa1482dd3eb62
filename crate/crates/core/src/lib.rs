//! Freshness-oriented polling middleware for leader/follower systems.
//!
//! A leader polls followers over an unreliable datagram transport, picking
//! the next follower with a Whittle-index rule over age, link reliability and
//! application weight. Followers keep freshness-oriented queues (single-slot
//! LIFO or rate-controlled FIFO), fragment large updates and retransmit
//! fragments until they are acknowledged.
//!
//! The [`sim`] module runs the same leader and follower code over a
//! deterministic discrete-event network, alongside a slotted random-access
//! baseline and a mobility-tracking scenario.

pub mod aoi;
pub mod follower;
pub mod leader;
pub mod scheduler;
pub mod sim;
pub mod wire;

pub use aoi::{AgeRecord, AoiTrace, Duration, MetricsAccumulator, Timestamp};
pub use scheduler::{LinkEstimator, Policy, PolicyKind, SchedulerView, WeightEstimator};


pub use sim::{MetricsReport, SimConfig};
