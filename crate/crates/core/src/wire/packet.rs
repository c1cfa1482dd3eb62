//! Datagram layouts.
//!
//! Every datagram starts with a five byte header:
//!
//! ```text
//! magic 0xA6 | version 0x01 | type u8 | sender u16
//! ```
//!
//! followed by a type-specific body. Multi-byte integers are big-endian and
//! floats are IEEE-754 binary64, also big-endian.
//!
//! ```text
//! POLL      poll_seq u32, target u16, ack_flag u8, [ack_seq u32, ack_index u16],
//!           entry_count u8, entries { follower u16, count u8, waypoints { t_us i64, x f64, y f64, z f64 } }
//! FRAG      update_seq u32, frag_index u16, frag_count u16, gen_ts_us i64, payload_len u16, payload
//! SYNC_REQ  t1_us i64
//! SYNC_RESP t1_us i64, t2_us i64, t3_us i64
//! ```
//!
//! A FRAG with `frag_count == 0` is a NoData response and carries no payload.

use bytes::Bytes;

use super::{DecodeError, EncodeError};
use crate::aoi::Timestamp;

pub const MAGIC: u8 = 0xA6;
pub const VERSION: u8 = 0x01;
pub const HEADER_LEN: usize = 5;

const TYPE_POLL: u8 = 1;
const TYPE_FRAG: u8 = 2;
const TYPE_SYNC_REQ: u8 = 3;
const TYPE_SYNC_RESP: u8 = 4;

/// Fixed part of a FRAG datagram, header included.
pub const FRAG_OVERHEAD: usize = HEADER_LEN + 18;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub t: Timestamp,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Most recent waypoints for one follower, as carried in every poll.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlEntry {
    pub follower: u16,
    pub waypoints: Vec<Waypoint>,
}

/// Cumulative acknowledgement: every fragment up to and including
/// `(update_seq, frag_index)` has been received.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ack {
    pub update_seq: u32,
    pub frag_index: u16,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PollPacket {
    pub poll_seq: u32,
    pub target: u16,
    pub ack: Option<Ack>,
    pub control: Vec<ControlEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fragment {
    pub update_seq: u32,
    pub frag_index: u16,
    /// Zero marks a NoData response.
    pub frag_count: u16,
    pub gen_ts: Timestamp,
    pub payload: Bytes,
}

impl Fragment {
    pub fn no_data(gen_ts: Timestamp) -> Self {
        Fragment {
            update_seq: 0,
            frag_index: 0,
            frag_count: 0,
            gen_ts,
            payload: Bytes::new(),
        }
    }

    pub fn is_no_data(&self) -> bool {
        self.frag_count == 0
    }

    pub fn ack(&self) -> Ack {
        Ack {
            update_seq: self.update_seq,
            frag_index: self.frag_index,
        }
    }

    pub fn is_last(&self) -> bool {
        self.frag_count > 0 && self.frag_index + 1 == self.frag_count
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Poll(PollPacket),
    Frag(Fragment),
    SyncReq { t1: Timestamp },
    SyncResp { t1: Timestamp, t2: Timestamp, t3: Timestamp },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    pub sender: u16,
    pub message: Message,
}

impl Packet {
    pub fn new(sender: u16, message: Message) -> Self {
        Packet { sender, message }
    }
}

fn put_ts(out: &mut Vec<u8>, t: Timestamp) {
    out.extend_from_slice(&t.as_micros().to_be_bytes());
}

pub fn encode(packet: &Packet) -> Result<Vec<u8>, EncodeError> {
    let mut out = Vec::with_capacity(64);
    out.push(MAGIC);
    out.push(VERSION);
    let ty = match packet.message {
        Message::Poll(_) => TYPE_POLL,
        Message::Frag(_) => TYPE_FRAG,
        Message::SyncReq { .. } => TYPE_SYNC_REQ,
        Message::SyncResp { .. } => TYPE_SYNC_RESP,
    };
    out.push(ty);
    out.extend_from_slice(&packet.sender.to_be_bytes());
    match &packet.message {
        Message::Poll(poll) => {
            out.extend_from_slice(&poll.poll_seq.to_be_bytes());
            out.extend_from_slice(&poll.target.to_be_bytes());
            match poll.ack {
                Some(ack) => {
                    out.push(1);
                    out.extend_from_slice(&ack.update_seq.to_be_bytes());
                    out.extend_from_slice(&ack.frag_index.to_be_bytes());
                }
                None => out.push(0),
            }
            let entries = u8::try_from(poll.control.len())
                .map_err(|_| EncodeError::TooManyControlEntries(poll.control.len()))?;
            out.push(entries);
            for entry in &poll.control {
                out.extend_from_slice(&entry.follower.to_be_bytes());
                let count = u8::try_from(entry.waypoints.len()).map_err(|_| EncodeError::TooManyWaypoints {
                    follower: entry.follower,
                    count: entry.waypoints.len(),
                })?;
                out.push(count);
                for wp in &entry.waypoints {
                    put_ts(&mut out, wp.t);
                    out.extend_from_slice(&wp.x.to_be_bytes());
                    out.extend_from_slice(&wp.y.to_be_bytes());
                    out.extend_from_slice(&wp.z.to_be_bytes());
                }
            }
        }
        Message::Frag(frag) => {
            if frag.is_no_data() && (!frag.payload.is_empty() || frag.frag_index != 0) {
                return Err(EncodeError::NoDataWithPayload);
            }
            if !frag.is_no_data() && frag.frag_index >= frag.frag_count {
                return Err(EncodeError::IndexOutOfRange {
                    index: frag.frag_index,
                    count: frag.frag_count,
                });
            }
            let len = u16::try_from(frag.payload.len()).map_err(|_| EncodeError::PayloadTooLarge(frag.payload.len()))?;
            out.reserve(frag.payload.len() + 18);
            out.extend_from_slice(&frag.update_seq.to_be_bytes());
            out.extend_from_slice(&frag.frag_index.to_be_bytes());
            out.extend_from_slice(&frag.frag_count.to_be_bytes());
            put_ts(&mut out, frag.gen_ts);
            out.extend_from_slice(&len.to_be_bytes());
            out.extend_from_slice(&frag.payload);
        }
        Message::SyncReq { t1 } => put_ts(&mut out, *t1),
        Message::SyncResp { t1, t2, t3 } => {
            put_ts(&mut out, *t1);
            put_ts(&mut out, *t2);
            put_ts(&mut out, *t3);
        }
    }
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        let available = self.buf.len() - self.pos;
        if available < n {
            return Err(DecodeError::Truncated {
                offset: self.pos,
                needed: n,
                available,
            });
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], DecodeError> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u8(&mut self) -> Result<u8, DecodeError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, DecodeError> {
        Ok(u16::from_be_bytes(self.array()?))
    }

    fn u32(&mut self) -> Result<u32, DecodeError> {
        Ok(u32::from_be_bytes(self.array()?))
    }

    fn ts(&mut self) -> Result<Timestamp, DecodeError> {
        Ok(Timestamp::from_micros(i64::from_be_bytes(self.array()?)))
    }

    fn f64(&mut self) -> Result<f64, DecodeError> {
        Ok(f64::from_be_bytes(self.array()?))
    }

    fn finish(&self) -> Result<(), DecodeError> {
        let trailing = self.buf.len() - self.pos;
        if trailing != 0 {
            return Err(DecodeError::LengthMismatch {
                expected: self.pos,
                actual: self.buf.len(),
            });
        }
        Ok(())
    }
}

pub fn decode(bytes: &[u8]) -> Result<Packet, DecodeError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let magic = r.u8()?;
    if magic != MAGIC {
        return Err(DecodeError::BadMagic(magic));
    }
    let version = r.u8()?;
    if version != VERSION {
        return Err(DecodeError::BadVersion(version));
    }
    let ty = r.u8()?;
    let sender = r.u16()?;
    let message = match ty {
        TYPE_POLL => {
            let poll_seq = r.u32()?;
            let target = r.u16()?;
            let ack = match r.u8()? {
                0 => None,
                1 => Some(Ack {
                    update_seq: r.u32()?,
                    frag_index: r.u16()?,
                }),
                other => return Err(DecodeError::BadField { field: "ack_flag", value: other as u64 }),
            };
            let entries = r.u8()?;
            let mut control = Vec::with_capacity(entries as usize);
            for _ in 0..entries {
                let follower = r.u16()?;
                let count = r.u8()?;
                let mut waypoints = Vec::with_capacity(count as usize);
                for _ in 0..count {
                    waypoints.push(Waypoint {
                        t: r.ts()?,
                        x: r.f64()?,
                        y: r.f64()?,
                        z: r.f64()?,
                    });
                }
                control.push(ControlEntry { follower, waypoints });
            }
            Message::Poll(PollPacket { poll_seq, target, ack, control })
        }
        TYPE_FRAG => {
            let update_seq = r.u32()?;
            let frag_index = r.u16()?;
            let frag_count = r.u16()?;
            let gen_ts = r.ts()?;
            let len = r.u16()? as usize;
            if frag_count == 0 {
                if len != 0 {
                    return Err(DecodeError::LengthMismatch {
                        expected: 0,
                        actual: len,
                    });
                }
                if frag_index != 0 {
                    return Err(DecodeError::BadField { field: "frag_index", value: frag_index as u64 });
                }
            } else if frag_index >= frag_count {
                return Err(DecodeError::BadField { field: "frag_index", value: frag_index as u64 });
            }
            let payload = Bytes::copy_from_slice(r.take(len)?);
            Message::Frag(Fragment {
                update_seq,
                frag_index,
                frag_count,
                gen_ts,
                payload,
            })
        }
        TYPE_SYNC_REQ => Message::SyncReq { t1: r.ts()? },
        TYPE_SYNC_RESP => Message::SyncResp {
            t1: r.ts()?,
            t2: r.ts()?,
            t3: r.ts()?,
        },
        other => return Err(DecodeError::BadType(other)),
    };
    r.finish()?;
    Ok(Packet { sender, message })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hex(s: &str) -> Vec<u8> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        (0..s.len()).step_by(2).map(|i| u8::from_str_radix(&s[i..i + 2], 16).unwrap()).collect()
    }

    fn sample_frag() -> Packet {
        Packet::new(
            4,
            Message::Frag(Fragment {
                update_seq: 9,
                frag_index: 1,
                frag_count: 3,
                gen_ts: Timestamp::from_micros(1_234),
                payload: Bytes::from_static(b"abcdef"),
            }),
        )
    }

    #[test]
    fn golden_poll() {
        let p = Packet::new(
            0,
            Message::Poll(PollPacket { poll_seq: 1, target: 2, ack: None, control: vec![] }),
        );
        let bytes = encode(&p).unwrap();
        assert_eq!(bytes, hex("A6 01 01 0000 00000001 0002 00 00"));
        assert_eq!(decode(&bytes).unwrap(), p);
    }

    #[test]
    fn golden_no_data() {
        let p = Packet::new(3, Message::Frag(Fragment::no_data(Timestamp::ZERO)));
        let bytes = encode(&p).unwrap();
        assert_eq!(bytes, hex("A6 01 02 0003 00000000 0000 0000 0000000000000000 0000"));
        assert_eq!(bytes.len(), 23);
        assert!(bytes.ends_with(&[0, 0]));
        assert_eq!(decode(&bytes).unwrap(), p);
    }

    #[test]
    fn poll_with_ack_and_control_round_trips() {
        let p = Packet::new(
            0,
            Message::Poll(PollPacket {
                poll_seq: 77,
                target: 3,
                ack: Some(Ack { update_seq: 5, frag_index: 2 }),
                control: vec![
                    ControlEntry {
                        follower: 3,
                        waypoints: vec![Waypoint { t: Timestamp::from_micros(-5), x: 1.5, y: -2.0, z: 1.0 }],
                    },
                    ControlEntry { follower: 4, waypoints: vec![] },
                ],
            }),
        );
        let bytes = encode(&p).unwrap();
        assert_eq!(bytes.len(), HEADER_LEN + 4 + 2 + 1 + 6 + 1 + (3 + 32) + 3);
        assert_eq!(decode(&bytes).unwrap(), p);
    }

    #[test]
    fn sync_round_trips() {
        for m in [
            Message::SyncReq { t1: Timestamp::from_micros(-1) },
            Message::SyncResp {
                t1: Timestamp::from_micros(1),
                t2: Timestamp::from_micros(2),
                t3: Timestamp::from_micros(i64::MAX),
            },
        ] {
            let p = Packet::new(12, m);
            assert_eq!(decode(&encode(&p).unwrap()).unwrap(), p);
        }
    }

    #[test]
    fn decode_errors_are_distinct() {
        let mut bytes = encode(&sample_frag()).unwrap();
        assert_eq!(decode(&bytes[..bytes.len() - 1]), Err(DecodeError::Truncated { offset: 23, needed: 6, available: 5 }));
        bytes.push(0);
        assert!(matches!(decode(&bytes), Err(DecodeError::LengthMismatch { .. })));
        bytes.pop();
        bytes[0] = 0xA7;
        assert_eq!(decode(&bytes), Err(DecodeError::BadMagic(0xA7)));
        bytes[0] = MAGIC;
        bytes[1] = 2;
        assert_eq!(decode(&bytes), Err(DecodeError::BadVersion(2)));
        bytes[1] = VERSION;
        bytes[2] = 9;
        assert_eq!(decode(&bytes), Err(DecodeError::BadType(9)));
        assert!(matches!(decode(&[]), Err(DecodeError::Truncated { .. })));
    }

    #[test]
    fn no_data_with_payload_length_is_rejected() {
        let mut bytes = encode(&Packet::new(3, Message::Frag(Fragment::no_data(Timestamp::ZERO)))).unwrap();
        let n = bytes.len();
        bytes[n - 1] = 1;
        bytes.push(0xFF);
        assert!(matches!(decode(&bytes), Err(DecodeError::LengthMismatch { .. })));
    }

    #[test]
    fn oversize_fields_are_rejected() {
        let big = Packet::new(
            1,
            Message::Frag(Fragment {
                update_seq: 0,
                frag_index: 0,
                frag_count: 1,
                gen_ts: Timestamp::ZERO,
                payload: Bytes::from(vec![0u8; 65_536]),
            }),
        );
        assert_eq!(encode(&big), Err(EncodeError::PayloadTooLarge(65_536)));
        let many = Packet::new(
            0,
            Message::Poll(PollPacket {
                poll_seq: 0,
                target: 1,
                ack: None,
                control: vec![ControlEntry { follower: 1, waypoints: vec![] }; 256],
            }),
        );
        assert_eq!(encode(&many), Err(EncodeError::TooManyControlEntries(256)));
    }
}
