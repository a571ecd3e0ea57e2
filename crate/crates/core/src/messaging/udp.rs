use std::io::ErrorKind;
use std::net::{SocketAddr, ToSocketAddrs, UdpSocket};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    decode, decode_header, encode, encode_header, BoundingBoxesDist, MessagingError, Sink,
    StreamHeader,
};

/// Datagram-per-message sender. The first datagram carries the stream header.
pub struct UdpSink {
    socket: UdpSocket,
    target: SocketAddr,
    header: StreamHeader,
    header_sent: bool,
    fault: Option<(f64, ChaCha8Rng)>,
    injected_drops: u64,
}

impl UdpSink {
    pub fn connect(target: impl ToSocketAddrs) -> Result<Self, MessagingError> {
        let target = target
            .to_socket_addrs()?
            .next()
            .ok_or_else(|| std::io::Error::new(ErrorKind::InvalidInput, "no address"))?;
        let bind: SocketAddr = if target.is_ipv4() {
            "0.0.0.0:0".parse().expect("literal")
        } else {
            "[::]:0".parse().expect("literal")
        };
        Ok(Self {
            socket: UdpSocket::bind(bind)?,
            target,
            header: StreamHeader::default(),
            header_sent: false,
            fault: None,
            injected_drops: 0,
        })
    }

    /// Silently discards each message with probability `rate` (seeded), as a lossy link would.
    pub fn with_drop_injection(mut self, rate: f64, seed: u64) -> Self {
        self.fault = Some((rate, ChaCha8Rng::seed_from_u64(seed)));
        self
    }

    pub fn set_drop_rate(&mut self, rate: f64) {
        if let Some((r, _)) = &mut self.fault {
            *r = rate;
        }
    }

    pub fn injected_drops(&self) -> u64 {
        self.injected_drops
    }
}

impl Sink for UdpSink {
    fn deliver(&mut self, msg: &BoundingBoxesDist) -> Result<(), MessagingError> {
        if !self.header_sent {
            self.socket
                .send_to(&encode_header(&self.header), self.target)?;
            self.header_sent = true;
        }
        let bytes = encode(msg)?;
        if let Some((rate, rng)) = &mut self.fault {
            if rng.random::<f64>() < *rate {
                self.injected_drops += 1;
                return Ok(());
            }
        }
        self.socket.send_to(&bytes, self.target)?;
        Ok(())
    }
}

/// Datagram receiver with sequence-gap accounting.
pub struct UdpSource {
    socket: UdpSocket,
    buf: Vec<u8>,
    header: Option<StreamHeader>,
    last_seq: Option<u64>,
    received: u64,
    gaps: u64,
    late: u64,
    malformed: u64,
}

impl UdpSource {
    pub fn bind(addr: impl ToSocketAddrs) -> Result<Self, MessagingError> {
        Ok(Self {
            socket: UdpSocket::bind(addr)?,
            buf: vec![0; 65_536],
            header: None,
            last_seq: None,
            received: 0,
            gaps: 0,
            late: 0,
            malformed: 0,
        })
    }

    pub fn local_addr(&self) -> Result<SocketAddr, MessagingError> {
        Ok(self.socket.local_addr()?)
    }

    pub fn header(&self) -> Option<&StreamHeader> {
        self.header.as_ref()
    }

    /// Messages missing between received sequence numbers.
    pub fn gaps(&self) -> u64 {
        self.gaps
    }

    pub fn received(&self) -> u64 {
        self.received
    }

    /// Messages that arrived after a later sequence number.
    pub fn late(&self) -> u64 {
        self.late
    }

    pub fn malformed(&self) -> u64 {
        self.malformed
    }

    pub fn last_seq(&self) -> Option<u64> {
        self.last_seq
    }

    /// Next message, or `None` if nothing arrives within `timeout`.
    pub fn recv_timeout(
        &mut self,
        timeout: Duration,
    ) -> Result<Option<BoundingBoxesDist>, MessagingError> {
        let deadline = Instant::now() + timeout;
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            if left.is_zero() {
                return Ok(None);
            }
            self.socket.set_read_timeout(Some(left))?;
            let n = match self.socket.recv(&mut self.buf) {
                Ok(n) => n,
                Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {
                    return Ok(None)
                }
                Err(e) => return Err(e.into()),
            };
            let datagram = &self.buf[..n];
            if datagram.starts_with(b"{\"proto\"") {
                match decode_header(datagram) {
                    Ok(h) => self.header = Some(h),
                    Err(_) => self.malformed += 1,
                }
                continue;
            }
            let Ok(msg) = decode(datagram) else {
                self.malformed += 1;
                continue;
            };
            self.account(msg.seq);
            return Ok(Some(msg));
        }
    }

    /// Receives until a message with `seq >= until` shows up or `timeout` passes.
    pub fn drain_until(
        &mut self,
        until: u64,
        timeout: Duration,
    ) -> Result<Vec<BoundingBoxesDist>, MessagingError> {
        let deadline = Instant::now() + timeout;
        let mut out = Vec::new();
        while self.last_seq.is_none_or(|s| s < until) {
            let left = deadline.saturating_duration_since(Instant::now());
            match self.recv_timeout(left)? {
                Some(m) => out.push(m),
                None => break,
            }
        }
        Ok(out)
    }

    fn account(&mut self, seq: u64) {
        self.received += 1;
        match self.last_seq {
            Some(last) if seq > last => {
                self.gaps += seq - last - 1;
                self.last_seq = Some(seq);
            }
            Some(_) => {
                self.late += 1;
                self.gaps = self.gaps.saturating_sub(1);
            }
            None => self.last_seq = Some(seq),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::messaging::{BoxDist, Publisher, RATE_CAP_HZ};

    fn msg(seq: u64) -> BoundingBoxesDist {
        BoundingBoxesDist {
            seq,
            stamp: seq as f64 / 30.0,
            boxes: vec![BoxDist {
                cx: 0.4,
                cy: 0.6,
                w: 0.05,
                h: 0.1,
                confidence: 0.8,
                dist: 1.25,
            }],
        }
    }

    #[test]
    fn loopback_round_trip_with_header() {
        let mut source = UdpSource::bind("127.0.0.1:0").unwrap();
        let mut sink = UdpSink::connect(source.local_addr().unwrap()).unwrap();
        for k in 0..5 {
            sink.deliver(&msg(k)).unwrap();
        }
        let got = source.drain_until(4, Duration::from_secs(2)).unwrap();
        assert_eq!(got.len(), 5);
        assert_eq!(got[3], msg(3));
        assert_eq!(source.header(), Some(&StreamHeader::default()));
        assert_eq!(source.gaps(), 0);
    }

    #[test]
    fn injected_drops_show_up_as_gaps() {
        let mut source = UdpSource::bind("127.0.0.1:0").unwrap();
        let sink = UdpSink::connect(source.local_addr().unwrap())
            .unwrap()
            .with_drop_injection(0.1, 7);
        let mut publisher = Publisher::new(sink, RATE_CAP_HZ, 600);
        let n = 600u64;
        for k in 0..n {
            publisher.publish(&msg(k), k * 20);
            if k % 50 == 49 {
                source
                    .drain_until(k.saturating_sub(1), Duration::from_millis(200))
                    .unwrap();
            }
        }
        // one last message over a clean link so trailing drops become visible gaps
        publisher.sink_mut().set_drop_rate(0.0);
        publisher.publish(&msg(n), n * 20);
        source.drain_until(n, Duration::from_secs(2)).unwrap();
        let injected = publisher.sink().injected_drops();
        assert!(injected > 30 && injected < 90, "{injected}");
        assert_eq!(source.gaps(), injected);
        assert_eq!(source.received() + injected, n + 1);
    }
}
