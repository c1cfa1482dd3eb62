use crate::wire::Fragment;

use super::{FollowerError, SensorUpdate};

/// Default fragment payload size: one typical-MTU datagram.
pub const DEFAULT_MAX_PAYLOAD: usize = 1400;

/// Splits an update into `max(1, ceil(len / max_payload))` fragments.
///
/// An empty update still yields one (empty) fragment so that it is delivered
/// and moves the receiver's age like any other update.
pub fn fragment_update(update: &SensorUpdate, max_payload: usize) -> Result<Vec<Fragment>, FollowerError> {
    if max_payload == 0 || max_payload > u16::MAX as usize {
        return Err(FollowerError::BadMaxPayload(max_payload));
    }
    let len = update.payload.len();
    let count = len.div_ceil(max_payload).max(1);
    if count > u16::MAX as usize {
        return Err(FollowerError::TooManyFragments(count));
    }
    Ok((0..count)
        .map(|k| {
            let lo = (k * max_payload).min(len);
            let hi = ((k + 1) * max_payload).min(len);
            Fragment {
                update_seq: update.update_seq,
                frag_index: k as u16,
                frag_count: count as u16,
                gen_ts: update.gen_ts,
                payload: update.payload.slice(lo..hi),
            }
        })
        .collect())
}
