//! Timestamps, per-follower age tracking and metric accumulation.
//!
//! The age of follower `i` at time `t` is `t - tau_i(t)`, where `tau_i` is
//! the largest generation timestamp delivered so far. Between deliveries it
//! grows with slope one; a delivery of a fresher update drops it to that
//! update's delay. [`AoiTrace`] stores that sawtooth exactly and
//! [`integrate_trace`] integrates it in closed form.

mod metrics;
mod record;
mod time;
mod trace;

use thiserror::Error;

pub use metrics::{FollowerMetrics, MetricsAccumulator};
pub use record::AgeRecord;
pub use time::{Duration, Timestamp};
pub use trace::{age_percentile, integrate_trace, AoiTrace};

pub(crate) use trace::quantile_of_samples;

/// Default grid step for percentile sampling.
pub const DEFAULT_PERCENTILE_STEP: Duration = Duration::from_millis(1);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AoiError {
    #[error("clock misuse: now {now} is earlier than tau {tau}")]
    ClockMisuse { now: Timestamp, tau: Timestamp },
    #[error("update generated at {gen_ts} is in the future of {now}")]
    FutureDated { gen_ts: Timestamp, now: Timestamp },
    #[error("trace breakpoint {at} precedes {last}")]
    NonMonotoneTrace { at: Timestamp, last: Timestamp },
    #[error("negative age {0}")]
    NegativeAge(f64),
    #[error("age {age} at {at} exceeds the ramp value {ramp}")]
    AgeAboveRamp { at: Timestamp, age: f64, ramp: f64 },
    #[error("trace is empty")]
    EmptyTrace,
    #[error("interval [{t0}, {t1}] is empty")]
    EmptyInterval { t0: Timestamp, t1: Timestamp },
    #[error("trace covers [{first}, {last}] but [{t0}, {t1}] was requested")]
    CoverageGap {
        t0: Timestamp,
        t1: Timestamp,
        first: Timestamp,
        last: Timestamp,
    },
    #[error("quantile {0} is outside (0, 1)")]
    BadQuantile(f64),
    #[error("sample step {0} must be positive")]
    BadSampleStep(Duration),
    #[error("elapsed time is zero")]
    ZeroElapsed,
    #[error("unknown follower {0}")]
    UnknownFollower(u16),
}
