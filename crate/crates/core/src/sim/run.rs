use std::io::{BufRead, Write};
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::detector::{frame_rng, synth_detections, BoxSource, DistanceEstimator};
use super::kinematics::{step_landing, step_uav, UavState};
use super::scenario::{DistanceSpec, Scenario};
use super::{generate_dataset, SimError};
use crate::distance::{fit, read_model};
use crate::geometry::{Vec3, WorldPoint2D};
use crate::messaging::{
    BoundingBoxesDist, ChannelStats, InProcessBus, Published, Publisher, Subscription, UdpSink,
    UdpSource, RATE_CAP_HZ,
};
use crate::mission::{
    Command, Diagnostics, EmergencyPlan, FlightMode, MissionController, Perception,
    TransitionRecord,
};

/// Link between the ground station and the vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transport {
    InProcess,
    /// Loopback UDP, one datagram per message.
    Udp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersonTruth {
    pub id: u32,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PublishOutcome {
    Sent,
    RateLimited,
    Failed,
}

impl From<Published> for PublishOutcome {
    fn from(p: Published) -> Self {
        match p {
            Published::Sent => PublishOutcome::Sent,
            Published::RateLimited => PublishOutcome::RateLimited,
            Published::Failed => PublishOutcome::Failed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunEnd {
    Touchdown,
    Timeout,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkStats {
    pub received: u64,
    pub gaps: u64,
}

/// One line of a simulation trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum TraceRecord {
    Header {
        scenario: Scenario,
        transport: Transport,
        distance_source: String,
    },
    Truth {
        t: f64,
        people: Vec<PersonTruth>,
    },
    Message {
        t: f64,
        outcome: PublishOutcome,
        msg: BoundingBoxesDist,
        sources: Vec<BoxSource>,
    },
    Uav {
        t: f64,
        mode: FlightMode,
        position: Vec3,
        velocity: Vec3,
    },
    Transition(TransitionRecord),
    Plan(EmergencyPlan),
    Touchdown {
        t: f64,
        x: f64,
        y: f64,
    },
    Summary {
        end: RunEnd,
        channel: ChannelStats,
        link: LinkStats,
        diagnostics: Option<Diagnostics>,
    },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimulationTrace {
    pub records: Vec<TraceRecord>,
}

impl SimulationTrace {
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<(), SimError> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("in-memory write");
        buf
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self, SimError> {
        let mut records = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let r = serde_json::from_str(&line)
                .map_err(|e| SimError::Invalid(format!("trace line {}: {e}", i + 1)))?;
            records.push(r);
        }
        Ok(Self { records })
    }

    pub fn scenario(&self) -> Option<&Scenario> {
        self.records.iter().find_map(|r| match r {
            TraceRecord::Header { scenario, .. } => Some(scenario),
            _ => None,
        })
    }

    pub fn transitions(&self) -> impl Iterator<Item = &TransitionRecord> {
        self.records.iter().filter_map(|r| match r {
            TraceRecord::Transition(t) => Some(t),
            _ => None,
        })
    }

    pub fn plan(&self) -> Option<&EmergencyPlan> {
        self.records.iter().find_map(|r| match r {
            TraceRecord::Plan(p) => Some(p),
            _ => None,
        })
    }

    pub fn touchdown(&self) -> Option<(f64, WorldPoint2D)> {
        self.records.iter().find_map(|r| match r {
            TraceRecord::Touchdown { t, x, y } => Some((*t, WorldPoint2D::new(*x, *y))),
            _ => None,
        })
    }
}

/// Builds the distance source named by the scenario. Model paths are
/// resolved against `base_dir`.
pub fn resolve_estimator(
    spec: &DistanceSpec,
    base_dir: &Path,
) -> Result<DistanceEstimator, SimError> {
    match spec {
        DistanceSpec::GroundTruth => Ok(DistanceEstimator::GroundTruth),
        DistanceSpec::Model { path } => {
            let file = std::fs::File::open(base_dir.join(path))?;
            Ok(DistanceEstimator::Model(read_model(
                std::io::BufReader::new(file),
            )?))
        }
        DistanceSpec::Train {
            dataset,
            hyper,
            seed,
        } => {
            let data = generate_dataset(dataset, *seed)?;
            Ok(DistanceEstimator::Model(fit(&data, hyper, *seed)?))
        }
    }
}

#[allow(clippy::large_enum_variant)]
enum Link {
    InProcess {
        publisher: Publisher<InProcessBus>,
        sub: Subscription,
        received: u64,
    },
    Udp {
        publisher: Publisher<UdpSink>,
        source: UdpSource,
    },
}

const UDP_WAIT: Duration = Duration::from_secs(2);

impl Link {
    fn open(transport: Transport, ticks_per_second: u64) -> Result<Self, SimError> {
        Ok(match transport {
            Transport::InProcess => {
                let bus = InProcessBus::new();
                let sub = bus.subscribe();
                Link::InProcess {
                    publisher: Publisher::new(bus, RATE_CAP_HZ, ticks_per_second),
                    sub,
                    received: 0,
                }
            }
            Transport::Udp => {
                let source = UdpSource::bind("127.0.0.1:0")?;
                let sink = UdpSink::connect(source.local_addr()?)?;
                Link::Udp {
                    publisher: Publisher::new(sink, RATE_CAP_HZ, ticks_per_second),
                    source,
                }
            }
        })
    }

    fn publish(&mut self, msg: &BoundingBoxesDist, tick: u64) -> Published {
        match self {
            Link::InProcess { publisher, .. } => publisher.publish(msg, tick),
            Link::Udp { publisher, .. } => publisher.publish(msg, tick),
        }
    }

    /// Everything sent so far and not yet received.
    fn receive(&mut self, last_sent: Option<u64>) -> Result<Vec<BoundingBoxesDist>, SimError> {
        match self {
            Link::InProcess { sub, received, .. } => {
                let msgs = sub.drain();
                *received += msgs.len() as u64;
                Ok(msgs)
            }
            Link::Udp { source, .. } => match last_sent {
                Some(seq) if source.last_seq().is_none_or(|s| s < seq) => {
                    Ok(source.drain_until(seq, UDP_WAIT)?)
                }
                _ => Ok(Vec::new()),
            },
        }
    }

    fn stats(&self) -> (ChannelStats, LinkStats) {
        match self {
            Link::InProcess {
                publisher,
                received,
                ..
            } => (
                publisher.stats(),
                LinkStats {
                    received: *received,
                    gaps: 0,
                },
            ),
            Link::Udp { publisher, source } => (
                publisher.stats(),
                LinkStats {
                    received: source.received(),
                    gaps: source.gaps(),
                },
            ),
        }
    }
}

/// Runs the world, detector, link and controller in lockstep on the
/// scenario's integer clock.
pub fn run_scenario(
    sc: &Scenario,
    estimator: &DistanceEstimator,
    transport: Transport,
) -> Result<SimulationTrace, SimError> {
    sc.validate()?;
    let rates = sc.rates;
    let base = rates.base_hz as u64;
    let dt = 1.0 / base as f64;
    let n_ticks = (sc.duration * base as f64).round() as u64;

    let mut records = vec![TraceRecord::Header {
        scenario: sc.clone(),
        transport,
        distance_source: match estimator {
            DistanceEstimator::GroundTruth => "ground_truth".into(),
            DistanceEstimator::Model(_) => "model".into(),
        },
    }];
    let mut link = Link::open(transport, base)?;
    let mut controller = sc
        .mission
        .clone()
        .map(|cfg| {
            MissionController::new(
                cfg,
                sc.landing,
                sc.solver,
                Perception {
                    camera: sc.camera.pose,
                    image: sc.camera.dims(),
                },
            )
        })
        .transpose()
        .map_err(|e| SimError::Invalid(e.to_string()))?;
    let inbox = controller.as_ref().map(MissionController::inbox);

    let mut uav = UavState {
        position: sc.uav_start,
        velocity: Vec3::default(),
    };
    let mut cmd = Command::Setpoint(sc.uav_start);
    let mut last_setpoint = sc.uav_start;
    let mut seq = 0u64;
    let mut last_sent = None;
    let mut logged = 0usize;
    let mut end = RunEnd::Timeout;

    for k in 0..=n_ticks {
        let t = k as f64 * dt;
        if rates.due(k, rates.truth_hz) {
            records.push(TraceRecord::Truth {
                t,
                people: sc
                    .pedestrians
                    .iter()
                    .map(|p| {
                        let q = p.position_at(t);
                        PersonTruth {
                            id: p.id,
                            x: q.x,
                            y: q.y,
                        }
                    })
                    .collect(),
            });
        }
        if rates.due(k, rates.message_hz) {
            let mut rng = frame_rng(sc.seed, k);
            let det = synth_detections(
                &sc.camera,
                &sc.pedestrians,
                &sc.noise,
                estimator,
                seq,
                t,
                &mut rng,
            );
            let outcome = link.publish(&det.msg, k);
            if outcome == Published::Sent {
                last_sent = Some(seq);
            }
            records.push(TraceRecord::Message {
                t,
                outcome: outcome.into(),
                msg: det.msg,
                sources: det.sources,
            });
            seq += 1;
        }
        let Some(ctl) = controller.as_mut() else {
            continue;
        };
        if rates.due(k, rates.control_hz) {
            let inbox = inbox.as_ref().expect("controller inbox");
            for m in link.receive(last_sent)? {
                inbox.push(m);
            }
            let had_plan = ctl.plan().is_some();
            cmd = ctl.step(uav.position, t);
            if let Command::Setpoint(p) = cmd {
                last_setpoint = p;
            }
            for r in &ctl.transition_log()[logged..] {
                records.push(TraceRecord::Transition(r.clone()));
            }
            logged = ctl.transition_log().len();
            if !had_plan {
                if let Some(p) = ctl.plan() {
                    records.push(TraceRecord::Plan(p.clone()));
                }
            }
            records.push(TraceRecord::Uav {
                t,
                mode: ctl.state().mode,
                position: uav.position,
                velocity: uav.velocity,
            });
        }
        uav = match cmd {
            Command::Land => step_landing(uav, last_setpoint.xy(), dt, &sc.kinematics),
            Command::Setpoint(_) => step_uav(uav, &cmd, dt, &sc.kinematics),
        };
        if cmd == Command::Land && uav.position.z <= 0.0 {
            records.push(TraceRecord::Touchdown {
                t: t + dt,
                x: uav.position.x,
                y: uav.position.y,
            });
            end = RunEnd::Touchdown;
            break;
        }
    }

    let (channel, link_stats) = link.stats();
    records.push(TraceRecord::Summary {
        end,
        channel,
        link: link_stats,
        diagnostics: controller.as_ref().map(MissionController::diagnostics),
    });
    Ok(SimulationTrace { records })
}
