use std::collections::VecDeque;
use std::fmt::Debug;
use std::io;
use std::net::{SocketAddr, UdpSocket};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::aoi::{Duration, Timestamp};

/// Best-effort datagram transport with a clock.
///
/// The leader loop only talks to this trait, so it runs unchanged over real
/// sockets and over the simulated network.
pub trait Transport {
    type Addr: Clone + Eq + Debug;

    fn now(&self) -> Timestamp;

    fn send(&mut self, to: &Self::Addr, bytes: &[u8]) -> io::Result<()>;

    /// Next datagram, or `None` once `deadline` has passed.
    fn recv(&mut self, deadline: Timestamp) -> io::Result<Option<(Self::Addr, Vec<u8>)>>;
}

/// Largest UDP payload over IPv4.
pub const MAX_DATAGRAM: usize = 65_507;

/// Datagram socket with a wall clock, optionally skewed by a fixed offset.
#[derive(Debug)]
pub struct UdpTransport {
    socket: UdpSocket,
    clock_offset: Duration,
    buf: Vec<u8>,
}

impl UdpTransport {
    pub fn bind(addr: SocketAddr) -> io::Result<Self> {
        Ok(UdpTransport {
            socket: UdpSocket::bind(addr)?,
            clock_offset: Duration::ZERO,
            buf: vec![0; MAX_DATAGRAM],
        })
    }

    /// Skews this endpoint's clock; used to exercise clock synchronisation.
    pub fn with_clock_offset(mut self, offset: Duration) -> Self {
        self.clock_offset = offset;
        self
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.socket.local_addr()
    }
}

impl Transport for UdpTransport {
    type Addr = SocketAddr;

    fn now(&self) -> Timestamp {
        Timestamp::now_system() + self.clock_offset
    }

    fn send(&mut self, to: &SocketAddr, bytes: &[u8]) -> io::Result<()> {
        self.socket.send_to(bytes, to).map(|_| ())
    }

    fn recv(&mut self, deadline: Timestamp) -> io::Result<Option<(SocketAddr, Vec<u8>)>> {
        loop {
            let remaining = deadline - self.now();
            if remaining <= Duration::ZERO {
                return Ok(None);
            }
            self.socket.set_read_timeout(Some(remaining.to_std()))?;
            match self.socket.recv_from(&mut self.buf) {
                Ok((n, from)) => return Ok(Some((from, self.buf[..n].to_vec()))),
                Err(e) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => continue,
                // ICMP port-unreachable from an absent peer surfaces here on some platforms.
                Err(e) if e.kind() == io::ErrorKind::ConnectionReset => continue,
                Err(e) => return Err(e),
            }
        }
    }
}

/// One direction of a simulated link: Bernoulli loss, fixed latency, FIFO.
///
/// Survivors arrive `tx_time + latency` after they are sent, but never before
/// an earlier datagram on the same link. Contents are never altered.
#[derive(Debug, Clone)]
pub struct SimLink {
    loss: f64,
    latency: Duration,
    rng: ChaCha8Rng,
    in_flight: VecDeque<(Timestamp, Vec<u8>)>,
    last_arrival: Timestamp,
    pub sent: u64,
    pub dropped: u64,
}

impl SimLink {
    pub fn new(loss: f64, latency: Duration, seed: u64) -> Self {
        assert!((0.0..=1.0).contains(&loss), "loss probability {loss} outside [0, 1]");
        assert!(!latency.is_negative(), "negative latency");
        SimLink {
            loss,
            latency,
            rng: ChaCha8Rng::seed_from_u64(seed),
            in_flight: VecDeque::new(),
            last_arrival: Timestamp::from_micros(i64::MIN),
            sent: 0,
            dropped: 0,
        }
    }

    pub fn loss(&self) -> f64 {
        self.loss
    }

    /// Queues `bytes`; returns the arrival time, or `None` if it was lost.
    pub fn send(&mut self, now: Timestamp, bytes: Vec<u8>, tx_time: Duration) -> Option<Timestamp> {
        self.sent += 1;
        // one draw per datagram keeps the loss pattern independent of timing
        let lost = self.rng.random::<f64>() < self.loss;
        if lost {
            self.dropped += 1;
            return None;
        }
        let arrival = (now + tx_time + self.latency).max(self.last_arrival);
        self.last_arrival = arrival;
        self.in_flight.push_back((arrival, bytes));
        Some(arrival)
    }

    /// Pops the oldest datagram that has arrived by `now`.
    pub fn recv(&mut self, now: Timestamp) -> Option<Vec<u8>> {
        match self.in_flight.front() {
            Some(&(at, _)) if at <= now => self.in_flight.pop_front().map(|(_, b)| b),
            _ => None,
        }
    }

    pub fn next_arrival(&self) -> Option<Timestamp> {
        self.in_flight.front().map(|&(at, _)| at)
    }
}
