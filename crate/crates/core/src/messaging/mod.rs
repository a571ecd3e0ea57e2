//! Ground-station → UAV detection messages.
//!
//! Wire format is newline-delimited JSON (UTF-8). Every stream opens with the
//! header line `{"proto":"padguard/1","rate_cap_hz":30}`; each following line
//! is one [`BoundingBoxesDist`] with fields in declaration order:
//!
//! ```text
//! {"seq":0,"stamp":0.0,"boxes":[{"cx":..,"cy":..,"w":..,"h":..,"confidence":..,"dist":..}]}
//! ```

mod inproc;
mod rate;
mod udp;

pub use inproc::{InProcessBus, Subscription};
pub use rate::RateLimiter;
pub use udp::{UdpSink, UdpSource};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const PROTO: &str = "padguard/1";
/// Highest publication rate supported by the panoramic camera.
pub const RATE_CAP_HZ: u32 = 30;

#[derive(Debug, Error)]
pub enum MessagingError {
    #[error("field {0} is not finite")]
    NonFinite(&'static str),
    #[error("field {field} out of range: {value}")]
    OutOfRange { field: &'static str, value: f64 },
    #[error("malformed message: {0}")]
    Decode(#[from] serde_json::Error),
    #[error("unsupported stream header: {0}")]
    Header(String),
    #[error("seq {got} does not follow {last}")]
    SeqOrder { last: u64, got: u64 },
    #[error("channel closed")]
    Closed,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One detected person as sent over the link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxDist {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
    pub confidence: f64,
    /// Predicted horizontal distance to the camera, meters.
    pub dist: f64,
}

impl BoxDist {
    pub fn validate(&self) -> Result<(), MessagingError> {
        let fields = [
            ("cx", self.cx),
            ("cy", self.cy),
            ("w", self.w),
            ("h", self.h),
            ("confidence", self.confidence),
            ("dist", self.dist),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(MessagingError::NonFinite(name));
            }
        }
        for (name, v) in &fields[..5] {
            if !(0.0..=1.0).contains(v) {
                return Err(MessagingError::OutOfRange {
                    field: name,
                    value: *v,
                });
            }
        }
        if self.dist < 0.0 {
            return Err(MessagingError::OutOfRange {
                field: "dist",
                value: self.dist,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundingBoxesDist {
    pub seq: u64,
    /// Simulated seconds.
    pub stamp: f64,
    pub boxes: Vec<BoxDist>,
}

impl BoundingBoxesDist {
    pub fn validate(&self) -> Result<(), MessagingError> {
        if !self.stamp.is_finite() {
            return Err(MessagingError::NonFinite("stamp"));
        }
        self.boxes.iter().try_for_each(BoxDist::validate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamHeader {
    pub proto: String,
    pub rate_cap_hz: u32,
}

impl Default for StreamHeader {
    fn default() -> Self {
        Self {
            proto: PROTO.to_string(),
            rate_cap_hz: RATE_CAP_HZ,
        }
    }
}

pub fn encode_header(h: &StreamHeader) -> Vec<u8> {
    let mut out = serde_json::to_vec(h).expect("header serializes");
    out.push(b'\n');
    out
}

pub fn decode_header(line: &[u8]) -> Result<StreamHeader, MessagingError> {
    let h: StreamHeader = serde_json::from_slice(trim_newline(line))?;
    if h.proto != PROTO {
        return Err(MessagingError::Header(h.proto));
    }
    Ok(h)
}

/// Canonical newline-terminated JSON encoding.
pub fn encode(msg: &BoundingBoxesDist) -> Result<Vec<u8>, MessagingError> {
    msg.validate()?;
    let mut out = serde_json::to_vec(msg)?;
    out.push(b'\n');
    Ok(out)
}

pub fn decode(line: &[u8]) -> Result<BoundingBoxesDist, MessagingError> {
    let msg: BoundingBoxesDist = serde_json::from_slice(trim_newline(line))?;
    msg.validate()?;
    Ok(msg)
}

fn trim_newline(line: &[u8]) -> &[u8] {
    line.strip_suffix(b"\n").unwrap_or(line)
}

/// Publisher-side counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    /// Publish calls.
    pub attempted: u64,
    /// Messages handed to the transport.
    pub published: u64,
    /// Rate-limited or failed messages.
    pub dropped: u64,
    /// Subset of `dropped` caused by transport errors.
    pub failed: u64,
    /// Published messages per second over the publishing span.
    pub achieved_rate_hz: f64,
}

/// Where a publisher delivers accepted messages.
pub trait Sink {
    fn deliver(&mut self, msg: &BoundingBoxesDist) -> Result<(), MessagingError>;
}

/// Outcome of one publish call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Published {
    Sent,
    RateLimited,
    Failed,
}

/// Rate-capped publisher over any [`Sink`].
///
/// Time is an integer tick count; `ticks_per_second` converts the 1 s cap
/// window into ticks.
pub struct Publisher<S> {
    sink: S,
    limiter: RateLimiter,
    stats: ChannelStats,
    ticks_per_second: u64,
    first_tick: Option<u64>,
    last_tick: u64,
    last_seq: Option<u64>,
}

impl<S: Sink> Publisher<S> {
    pub fn new(sink: S, rate_cap_hz: u32, ticks_per_second: u64) -> Self {
        Self {
            sink,
            limiter: RateLimiter::new(rate_cap_hz, ticks_per_second),
            stats: ChannelStats::default(),
            ticks_per_second,
            first_tick: None,
            last_tick: 0,
            last_seq: None,
        }
    }

    pub fn publish(&mut self, msg: &BoundingBoxesDist, now_tick: u64) -> Published {
        self.stats.attempted += 1;
        if self.last_seq.is_some_and(|s| msg.seq <= s) || msg.validate().is_err() {
            self.stats.dropped += 1;
            self.stats.failed += 1;
            return Published::Failed;
        }
        self.last_seq = Some(msg.seq);
        if !self.limiter.admit(now_tick) {
            self.stats.dropped += 1;
            return Published::RateLimited;
        }
        if self.sink.deliver(msg).is_err() {
            self.stats.dropped += 1;
            self.stats.failed += 1;
            return Published::Failed;
        }
        self.stats.published += 1;
        self.first_tick.get_or_insert(now_tick);
        self.last_tick = now_tick;
        self.refresh_rate();
        Published::Sent
    }

    fn refresh_rate(&mut self) {
        let span = self.last_tick - self.first_tick.unwrap_or(self.last_tick);
        self.stats.achieved_rate_hz = if self.stats.published > 1 && span > 0 {
            (self.stats.published - 1) as f64 * self.ticks_per_second as f64 / span as f64
        } else {
            0.0
        };
    }

    pub fn stats(&self) -> ChannelStats {
        self.stats
    }

    pub fn sink(&self) -> &S {
        &self.sink
    }

    pub fn sink_mut(&mut self) -> &mut S {
        &mut self.sink
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Collect(Vec<BoundingBoxesDist>);

    impl Sink for Collect {
        fn deliver(&mut self, msg: &BoundingBoxesDist) -> Result<(), MessagingError> {
            self.0.push(msg.clone());
            Ok(())
        }
    }

    struct Broken;

    impl Sink for Broken {
        fn deliver(&mut self, _: &BoundingBoxesDist) -> Result<(), MessagingError> {
            Err(MessagingError::Closed)
        }
    }

    fn msg(seq: u64) -> BoundingBoxesDist {
        BoundingBoxesDist {
            seq,
            stamp: seq as f64 / 30.0,
            boxes: vec![BoxDist {
                cx: 0.25,
                cy: 0.5,
                w: 0.1,
                h: 0.2,
                confidence: 0.9,
                dist: 2.5,
            }],
        }
    }

    #[test]
    fn empty_message_encoding() {
        let m = BoundingBoxesDist {
            seq: 0,
            stamp: 0.0,
            boxes: vec![],
        };
        assert_eq!(
            encode(&m).unwrap(),
            b"{\"seq\":0,\"stamp\":0.0,\"boxes\":[]}\n"
        );
        assert_eq!(decode(&encode(&m).unwrap()).unwrap(), m);
    }

    #[test]
    fn header_line() {
        assert_eq!(
            encode_header(&StreamHeader::default()),
            b"{\"proto\":\"padguard/1\",\"rate_cap_hz\":30}\n"
        );
        assert!(decode_header(b"{\"proto\":\"padguard/1\",\"rate_cap_hz\":30}\n").is_ok());
        assert!(decode_header(b"{\"proto\":\"other/9\",\"rate_cap_hz\":30}").is_err());
    }

    #[test]
    fn rejects_bad_fields() {
        let mut m = msg(1);
        m.boxes[0].dist = f64::NAN;
        assert!(matches!(encode(&m), Err(MessagingError::NonFinite("dist"))));
        let mut m = msg(1);
        m.boxes[0].dist = -0.1;
        assert!(encode(&m).is_err());
        let mut m = msg(1);
        m.stamp = f64::INFINITY;
        assert!(encode(&m).is_err());
        assert!(decode(b"{\"seq\":1,\"stamp\":0.0}").is_err());
        assert!(decode(b"{\"seq\":1,\"stamp\":0.0,\"boxes\":[{\"cx\":2,\"cy\":0,\"w\":0,\"h\":0,\"confidence\":1,\"dist\":1}]}").is_err());
    }

    #[test]
    fn large_message_round_trip() {
        let boxes: Vec<BoxDist> = (0..1000)
            .map(|i| {
                let t = i as f64 / 1000.0;
                BoxDist {
                    cx: t,
                    cy: 1.0 - t,
                    w: t / 3.0,
                    h: (t * 7.0).fract(),
                    confidence: t.sqrt(),
                    dist: 5.0 * t + 0.1 / 3.0,
                }
            })
            .collect();
        let m = BoundingBoxesDist {
            seq: u64::MAX,
            stamp: 1_234.567_891_011,
            boxes,
        };
        assert_eq!(decode(&encode(&m).unwrap()).unwrap(), m);
    }

    #[test]
    fn publish_counts() {
        let mut p = Publisher::new(Collect(vec![]), RATE_CAP_HZ, 600);
        assert_eq!(p.publish(&msg(0), 0), Published::Sent);
        let s = p.stats();
        assert_eq!((s.attempted, s.published, s.dropped), (1, 1, 0));
    }

    #[test]
    fn over_rate_messages_are_dropped() {
        // 60 messages inside one second, ticks at 600 Hz
        let mut p = Publisher::new(Collect(vec![]), RATE_CAP_HZ, 600);
        for k in 0..60u64 {
            p.publish(&msg(k), k * 10);
        }
        let s = p.stats();
        assert_eq!((s.published, s.dropped), (30, 30));
        assert_eq!(p.sink().0.len(), 30);
    }

    #[test]
    fn transport_failures_are_counted() {
        let mut p = Publisher::new(Broken, RATE_CAP_HZ, 600);
        assert_eq!(p.publish(&msg(0), 0), Published::Failed);
        assert_eq!(p.publish(&msg(0), 20), Published::Failed, "repeated seq");
        let s = p.stats();
        assert_eq!((s.published, s.dropped, s.failed), (0, 2, 2));
    }
}
