//! Bit-exact datagram encodings and the transports that carry them.

mod packet;
mod transport;

use thiserror::Error;

pub use packet::{
    decode, encode, Ack, ControlEntry, Fragment, Message, Packet, PollPacket, Waypoint, FRAG_OVERHEAD, HEADER_LEN,
    MAGIC, VERSION,
};
pub use transport::{SimLink, Transport, UdpTransport, MAX_DATAGRAM};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("bad magic byte {0:#04x}")]
    BadMagic(u8),
    #[error("unsupported version {0}")]
    BadVersion(u8),
    #[error("unknown packet type {0}")]
    BadType(u8),
    #[error("truncated at offset {offset}: needed {needed} bytes, {available} available")]
    Truncated { offset: usize, needed: usize, available: usize },
    #[error("length mismatch: expected {expected}, found {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("invalid {field} value {value}")]
    BadField { field: &'static str, value: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("payload of {0} bytes exceeds 65535")]
    PayloadTooLarge(usize),
    #[error("{0} control entries exceed 255")]
    TooManyControlEntries(usize),
    #[error("{count} waypoints for follower {follower} exceed 255")]
    TooManyWaypoints { follower: u16, count: usize },
    #[error("fragment index {index} not below count {count}")]
    IndexOutOfRange { index: u16, count: u16 },
    #[error("NoData fragment must have index 0 and no payload")]
    NoDataWithPayload,
}
