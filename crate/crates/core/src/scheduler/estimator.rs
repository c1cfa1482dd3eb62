use std::collections::VecDeque;

use super::SchedulerError;

pub const DEFAULT_WINDOW: usize = 10;
pub const DEFAULT_P_FLOOR: f64 = 0.05;
pub const DEFAULT_ALPHA: f64 = 0.8;

/// Windowed success fraction of the polls sent to one follower.
///
/// Before the window fills, the fraction is taken over the outcomes seen so
/// far. With nothing seen yet the estimate is optimistic (1.0) so every
/// follower gets polled early.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkEstimator {
    window: usize,
    p_floor: f64,
    outcomes: VecDeque<bool>,
    successes: usize,
}

impl LinkEstimator {
    pub fn new(window: usize, p_floor: f64) -> Result<Self, SchedulerError> {
        if window == 0 {
            return Err(SchedulerError::ZeroWindow);
        }
        if !(p_floor > 0.0 && p_floor <= 1.0) {
            return Err(SchedulerError::BadFloor(p_floor));
        }
        Ok(LinkEstimator {
            window,
            p_floor,
            outcomes: VecDeque::with_capacity(window),
            successes: 0,
        })
    }

    pub fn record(&mut self, success: bool) {
        if self.outcomes.len() == self.window && self.outcomes.pop_front() == Some(true) {
            self.successes -= 1;
        }
        self.outcomes.push_back(success);
        if success {
            self.successes += 1;
        }
    }

    pub fn estimate(&self) -> f64 {
        if self.outcomes.is_empty() {
            return 1.0;
        }
        let seen = self.outcomes.len().min(self.window).max(1);
        (self.successes as f64 / seen as f64).max(self.p_floor)
    }

    pub fn successes(&self) -> usize {
        self.successes
    }

    pub fn held(&self) -> usize {
        self.outcomes.len()
    }

    pub fn window(&self) -> usize {
        self.window
    }
}

impl Default for LinkEstimator {
    fn default() -> Self {
        LinkEstimator::new(DEFAULT_WINDOW, DEFAULT_P_FLOOR).expect("valid defaults")
    }
}

/// Exponential moving average of the observed relative speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightEstimator {
    w: f64,
    alpha: f64,
}

impl WeightEstimator {
    pub fn new(initial: f64, alpha: f64) -> Result<Self, SchedulerError> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(SchedulerError::BadAlpha(alpha));
        }
        if !(initial >= 0.0) {
            return Err(SchedulerError::NegativeWeight(initial));
        }
        Ok(WeightEstimator { w: initial, alpha })
    }

    pub fn weight(&self) -> f64 {
        self.w
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `w <- alpha w + (1 - alpha) v_hat`.
    pub fn update(&mut self, v_hat: f64) -> Result<f64, SchedulerError> {
        if !(v_hat >= 0.0) || !v_hat.is_finite() {
            return Err(SchedulerError::NegativeSpeed(v_hat));
        }
        self.w = self.alpha * self.w + (1.0 - self.alpha) * v_hat;
        Ok(self.w)
    }
}

impl Default for WeightEstimator {
    fn default() -> Self {
        WeightEstimator { w: 1.0, alpha: DEFAULT_ALPHA }
    }
}
