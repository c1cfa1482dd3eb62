use super::{AoiError, Duration, Timestamp};

/// Leader-side freshness state for one follower.
///
/// `tau` is the largest generation timestamp delivered so far. It starts at
/// the registration instant, so the age is zero at registration and ramps up
/// until the first delivery.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AgeRecord {
    pub follower_id: u16,
    tau: Timestamp,
    registered_at: Timestamp,
}

impl AgeRecord {
    pub fn new(follower_id: u16, registered_at: Timestamp) -> Self {
        AgeRecord {
            follower_id,
            tau: registered_at,
            registered_at,
        }
    }

    pub fn tau(&self) -> Timestamp {
        self.tau
    }

    pub fn registered_at(&self) -> Timestamp {
        self.registered_at
    }

    /// Age of information at `now`.
    pub fn age_at(&self, now: Timestamp) -> Result<Duration, AoiError> {
        let age = now - self.tau;
        if age.is_negative() {
            return Err(AoiError::ClockMisuse {
                now,
                tau: self.tau,
            });
        }
        Ok(age)
    }

    /// Folds a delivered update into the record and returns the new age.
    ///
    /// Stale or duplicate generation timestamps leave `tau` untouched.
    pub fn record_delivery(&mut self, gen_ts: Timestamp, now: Timestamp) -> Result<Duration, AoiError> {
        if gen_ts > now {
            return Err(AoiError::FutureDated { gen_ts, now });
        }
        // Validate before mutating so a rejected call leaves the record intact.
        let tau = self.tau.max(gen_ts);
        let age = now - tau;
        if age.is_negative() {
            return Err(AoiError::ClockMisuse { now, tau });
        }
        self.tau = tau;
        Ok(age)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn secs(s: i64) -> Timestamp {
        Timestamp::from_micros(s * 1_000_000)
    }

    fn record_with_tau(tau: Timestamp) -> AgeRecord {
        let mut r = AgeRecord::new(1, Timestamp::ZERO);
        r.record_delivery(tau, tau).unwrap();
        r
    }

    #[test]
    fn age_is_now_minus_tau() {
        let r = record_with_tau(secs(100));
        assert_eq!(r.age_at(secs(103)).unwrap(), Duration::from_secs(3));
        assert_eq!(r.age_at(secs(100)).unwrap(), Duration::ZERO);
    }

    #[test]
    fn age_before_tau_is_rejected() {
        let r = record_with_tau(secs(100));
        assert!(matches!(r.age_at(secs(99)), Err(AoiError::ClockMisuse { .. })));
    }

    #[test]
    fn stale_update_leaves_age() {
        let mut r = record_with_tau(secs(100));
        let age = r.record_delivery(secs(99), secs(103)).unwrap();
        assert_eq!(age, Duration::from_secs(3));
        assert_eq!(r.tau(), secs(100));
    }

    #[test]
    fn fresh_delivery_drops_age_to_delay() {
        let mut r = AgeRecord::new(1, Timestamp::ZERO);
        let age = r.record_delivery(secs(10), secs(12)).unwrap();
        assert_eq!(r.tau(), secs(10));
        assert_eq!(age, Duration::from_secs(2));
    }

    #[test]
    fn out_of_order_and_duplicate_are_ignored() {
        let mut r = record_with_tau(secs(100));
        assert_eq!(r.record_delivery(secs(90), secs(110)).unwrap(), Duration::from_secs(10));
        assert_eq!(r.tau(), secs(100));
        assert_eq!(r.record_delivery(secs(100), secs(110)).unwrap(), Duration::from_secs(10));
        assert_eq!(r.tau(), secs(100));
    }

    #[test]
    fn future_dated_update_is_rejected() {
        let mut r = AgeRecord::new(1, Timestamp::ZERO);
        let err = r.record_delivery(secs(5), secs(4)).unwrap_err();
        assert!(matches!(err, AoiError::FutureDated { .. }));
        assert_eq!(r.tau(), Timestamp::ZERO);
    }

    #[test]
    fn starts_at_registration() {
        let r = AgeRecord::new(7, secs(50));
        assert_eq!(r.tau(), secs(50));
        assert_eq!(r.age_at(secs(52)).unwrap(), Duration::from_secs(2));
    }
}
