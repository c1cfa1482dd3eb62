//! Transmission scheduling: the Whittle-index rule, baseline policies and
//! the link-reliability and weight estimators that feed them.

mod estimator;
mod policy;

use thiserror::Error;

pub use estimator::{LinkEstimator, WeightEstimator, DEFAULT_ALPHA, DEFAULT_P_FLOOR, DEFAULT_WINDOW};
pub use policy::{max_age_select, whittle_select, FollowerView, Policy, PolicyKind, SchedulerView};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchedulerError {
    #[error("no eligible follower")]
    NoEligible,
    #[error("follower {0} has non-positive reliability")]
    NonPositiveReliability(u16),
    #[error("estimator window must be positive")]
    ZeroWindow,
    #[error("reliability floor {0} outside (0, 1]")]
    BadFloor(f64),
    #[error("smoothing factor {0} outside [0, 1)")]
    BadAlpha(f64),
    #[error("negative weight {0}")]
    NegativeWeight(f64),
    #[error("speed estimate {0} must be finite and non-negative")]
    NegativeSpeed(f64),
    #[error("unknown policy `{0}` (expected whittle, maxage, roundrobin or random)")]
    UnknownPolicy(String),
}
