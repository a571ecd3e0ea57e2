//! Safe-landing state machine.
//!
//! The controller walks TAKEOFF → MISSION → PRELANDING → LANDING. While in
//! PRELANDING it consumes detection messages: any person inside the scan zone
//! raises the emergency flag and sends the vehicle to the retreat setpoint;
//! once enough dangerous messages accumulate, the landing spot is re-selected
//! once by the landing optimizer and the vehicle lands there.
//!
//! Messages may be produced from another thread through an [`Inbox`]; they are
//! only applied when [`MissionController::step`] drains the queue, so every
//! state change happens on the owning thread.

use std::sync::mpsc::{self, Receiver, Sender};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    image_to_campix, localize_person, CameraPose, ImageDims, ImagePoint, Vec3, WorldPoint2D,
};
use crate::landing::{solve, LandingParams, LandingProblem, LandingSolution, SolverConfig};
use crate::messaging::BoundingBoxesDist;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MissionError {
    #[error("invalid controller config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FlightMode {
    Takeoff,
    Mission,
    Prelanding,
    Landing,
}

/// What the vehicle is told to do on one control tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Setpoint(Vec3),
    Land,
}

impl Command {
    pub fn setpoint(&self) -> Option<Vec3> {
        match self {
            Command::Setpoint(p) => Some(*p),
            Command::Land => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControllerConfig {
    pub takeoff_position: Vec3,
    pub waypoints: Vec<Vec3>,
    /// Hover point above the pad.
    pub prelanding_pos: Vec3,
    /// Dangerous messages before the landing spot is re-selected.
    pub danger_threshold: u32,
    /// Altitude added to the hover point while retreating, meters.
    pub retreat_raise: f64,
    /// Consecutive clear messages that end an emergency. `None` keeps the
    /// emergency latched for the rest of the flight.
    pub clear_after: Option<u32>,
    pub acceptance_radius: f64,
    pub takeoff_tolerance: f64,
    pub landing_tolerance: f64,
    /// Time spent at the hover point before a nominal landing, seconds.
    pub prelanding_dwell: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            takeoff_position: Vec3::new(0.0, 0.0, 2.0),
            waypoints: Vec::new(),
            prelanding_pos: Vec3::new(0.0, 0.0, 2.0),
            danger_threshold: 150,
            retreat_raise: 2.0,
            clear_after: Some(30),
            acceptance_radius: 0.15,
            takeoff_tolerance: 0.1,
            landing_tolerance: 0.05,
            prelanding_dwell: 3.0,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<(), MissionError> {
        let points = std::iter::once(&self.takeoff_position)
            .chain(&self.waypoints)
            .chain(std::iter::once(&self.prelanding_pos));
        for p in points {
            if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) || p.z < 0.0 {
                return Err(MissionError::Config(format!("bad setpoint {p:?}")));
            }
        }
        if self.prelanding_pos.z <= 0.0 {
            return Err(MissionError::Config(
                "prelanding altitude must be positive".into(),
            ));
        }
        if self.danger_threshold == 0 {
            return Err(MissionError::Config(
                "danger_threshold must be at least 1".into(),
            ));
        }
        if self.clear_after == Some(0) {
            return Err(MissionError::Config(
                "clear_after must be at least 1".into(),
            ));
        }
        let positive = [
            ("acceptance_radius", self.acceptance_radius),
            ("takeoff_tolerance", self.takeoff_tolerance),
            ("landing_tolerance", self.landing_tolerance),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(MissionError::Config(format!("{name} must be positive")));
            }
        }
        if !(self.retreat_raise.is_finite() && self.retreat_raise >= 0.0) {
            return Err(MissionError::Config("retreat_raise must be >= 0".into()));
        }
        if !(self.prelanding_dwell.is_finite() && self.prelanding_dwell >= 0.0) {
            return Err(MissionError::Config("prelanding_dwell must be >= 0".into()));
        }
        Ok(())
    }
}

/// Ground camera as seen by the controller when localizing detections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perception {
    pub camera: CameraPose,
    pub image: ImageDims,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerState {
    pub mode: FlightMode,
    pub emergency: bool,
    pub emergency_landing: bool,
    pub danger_counter: u32,
    pub prelanding_pos: Vec3,
    pub retreat_pos: Vec3,
    pub mission_setpoints: Vec<Vec3>,
    /// Index of the next waypoint to reach.
    pub waypoint_index: usize,
    clear_streak: u32,
    hover_since: Option<f64>,
    forced: bool,
    last_seq: Option<u64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub processed: u64,
    /// Well-formed messages received outside PRELANDING.
    pub ignored: u64,
    /// Invalid or out-of-order messages.
    pub malformed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MessageOutcome {
    Processed,
    Ignored,
    Dropped,
}

/// One entry of the transition log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub t: f64,
    pub mode: FlightMode,
    pub emergency: bool,
    pub emergency_landing: bool,
    pub danger_counter: u32,
    /// `None` for the land command.
    pub setpoint: Option<Vec3>,
}

/// The one-shot landing re-selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmergencyPlan {
    pub seq: u64,
    pub stamp: f64,
    pub problem: LandingProblem,
    pub solution: LandingSolution,
    pub landing_point: WorldPoint2D,
}

/// Sending half of the controller's message queue.
#[derive(Debug, Clone)]
pub struct Inbox(Sender<BoundingBoxesDist>);

impl Inbox {
    /// Returns false once the controller is gone.
    pub fn push(&self, msg: BoundingBoxesDist) -> bool {
        self.0.send(msg).is_ok()
    }
}

pub struct MissionController {
    cfg: ControllerConfig,
    landing: LandingParams,
    solver: SolverConfig,
    perception: Perception,
    state: ControllerState,
    diagnostics: Diagnostics,
    plan: Option<EmergencyPlan>,
    log: Vec<TransitionRecord>,
    logged: Option<(FlightMode, bool, bool)>,
    queue_tx: Sender<BoundingBoxesDist>,
    queue_rx: Receiver<BoundingBoxesDist>,
}

impl MissionController {
    pub fn new(
        cfg: ControllerConfig,
        landing: LandingParams,
        solver: SolverConfig,
        perception: Perception,
    ) -> Result<Self, MissionError> {
        cfg.validate()?;
        landing
            .validate()
            .map_err(|e| MissionError::Config(e.to_string()))?;
        let state = ControllerState {
            mode: FlightMode::Takeoff,
            emergency: false,
            emergency_landing: false,
            danger_counter: 0,
            prelanding_pos: cfg.prelanding_pos,
            retreat_pos: raised(cfg.prelanding_pos, cfg.retreat_raise),
            mission_setpoints: cfg.waypoints.clone(),
            waypoint_index: 0,
            clear_streak: 0,
            hover_since: None,
            forced: false,
            last_seq: None,
        };
        let (queue_tx, queue_rx) = mpsc::channel();
        Ok(Self {
            cfg,
            landing,
            solver,
            perception,
            state,
            diagnostics: Diagnostics::default(),
            plan: None,
            log: Vec::new(),
            logged: None,
            queue_tx,
            queue_rx,
        })
    }

    pub fn inbox(&self) -> Inbox {
        Inbox(self.queue_tx.clone())
    }

    pub fn state(&self) -> &ControllerState {
        &self.state
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.cfg
    }

    pub fn landing_params(&self) -> &LandingParams {
        &self.landing
    }

    pub fn diagnostics(&self) -> Diagnostics {
        self.diagnostics
    }

    pub fn plan(&self) -> Option<&EmergencyPlan> {
        self.plan.as_ref()
    }

    pub fn transition_log(&self) -> &[TransitionRecord] {
        &self.log
    }

    /// Hovering is no longer possible: re-select the landing spot on the next
    /// message, whatever the danger counter says.
    pub fn force_emergency(&mut self) {
        self.state.forced = true;
    }

    pub fn on_bbox_message(&mut self, msg: &BoundingBoxesDist) -> MessageOutcome {
        if msg.validate().is_err() || self.state.last_seq.is_some_and(|s| msg.seq <= s) {
            self.diagnostics.malformed += 1;
            return MessageOutcome::Dropped;
        }
        self.state.last_seq = Some(msg.seq);
        if self.state.mode != FlightMode::Prelanding {
            self.diagnostics.ignored += 1;
            return MessageOutcome::Ignored;
        }
        self.diagnostics.processed += 1;

        let r_s = self.landing.r_s;
        let in_zone = msg.boxes.iter().any(|b| b.dist <= r_s);
        let st = &mut self.state;
        if in_zone || st.forced {
            st.emergency = true;
        }
        if in_zone {
            st.danger_counter += 1;
            st.clear_streak = 0;
        } else if st.emergency && !st.emergency_landing && !st.forced {
            if let Some(n) = self.cfg.clear_after {
                st.clear_streak += 1;
                if st.clear_streak >= n {
                    st.emergency = false;
                    st.danger_counter = 0;
                    st.clear_streak = 0;
                }
            }
        }
        let trigger = st.danger_counter >= self.cfg.danger_threshold || st.forced;
        if trigger && st.emergency && !st.emergency_landing {
            self.replan(msg);
        }
        MessageOutcome::Processed
    }

    fn replan(&mut self, msg: &BoundingBoxesDist) {
        let dims = self.perception.image;
        let people: Vec<WorldPoint2D> = msg
            .boxes
            .iter()
            .filter(|b| b.dist <= self.landing.r_s)
            .filter_map(|b| {
                let p = ImagePoint::new(b.cx * dims.width() as f64, b.cy * dims.height() as f64);
                let c = image_to_campix(p, dims).ok()?;
                Some(localize_person(c, b.dist, &self.perception.camera).position)
            })
            .collect();
        let center = self.state.prelanding_pos.xy();
        let problem = LandingProblem::new(people, center, self.landing);
        let solution = solve(&problem, &self.solver);
        let landing_point = solution.landing_point(&problem);
        let st = &mut self.state;
        st.prelanding_pos.x = landing_point.x;
        st.prelanding_pos.y = landing_point.y;
        st.retreat_pos = raised(st.prelanding_pos, self.cfg.retreat_raise);
        st.emergency_landing = true;
        st.hover_since = None;
        self.plan = Some(EmergencyPlan {
            seq: msg.seq,
            stamp: msg.stamp,
            problem,
            solution,
            landing_point,
        });
    }

    /// Advances the flight mode when the current phase is complete.
    pub fn mode_advance(&mut self, vehicle: Vec3, now: f64) {
        let st = &mut self.state;
        match st.mode {
            FlightMode::Takeoff => {
                if vehicle.distance(self.cfg.takeoff_position) <= self.cfg.takeoff_tolerance {
                    st.mode = FlightMode::Mission;
                }
            }
            FlightMode::Mission => {
                if let Some(wp) = st.mission_setpoints.get(st.waypoint_index) {
                    if vehicle.distance(*wp) <= self.cfg.acceptance_radius {
                        st.waypoint_index += 1;
                    }
                }
                if st.waypoint_index >= st.mission_setpoints.len() {
                    st.mode = FlightMode::Prelanding;
                    st.hover_since = None;
                }
            }
            FlightMode::Prelanding => {
                if st.emergency && !st.emergency_landing {
                    st.hover_since = None;
                    return;
                }
                if vehicle.distance(st.prelanding_pos) > self.cfg.landing_tolerance {
                    st.hover_since = None;
                    return;
                }
                let since = *st.hover_since.get_or_insert(now);
                if st.emergency_landing || now - since >= self.cfg.prelanding_dwell {
                    st.mode = FlightMode::Landing;
                }
            }
            FlightMode::Landing => {}
        }
    }

    /// Command for the current mode. Appends to the transition log when the
    /// mode or an emergency flag changed since the last tick.
    pub fn tick(&mut self, now: f64) -> Command {
        let st = &self.state;
        let cmd = match st.mode {
            FlightMode::Takeoff => Command::Setpoint(self.cfg.takeoff_position),
            FlightMode::Mission => Command::Setpoint(
                st.mission_setpoints
                    .get(st.waypoint_index)
                    .copied()
                    .unwrap_or(st.prelanding_pos),
            ),
            FlightMode::Prelanding if st.emergency && !st.emergency_landing => {
                Command::Setpoint(st.retreat_pos)
            }
            FlightMode::Prelanding => Command::Setpoint(st.prelanding_pos),
            FlightMode::Landing => Command::Land,
        };
        let key = (st.mode, st.emergency, st.emergency_landing);
        if self.logged != Some(key) {
            self.logged = Some(key);
            self.log.push(TransitionRecord {
                t: now,
                mode: st.mode,
                emergency: st.emergency,
                emergency_landing: st.emergency_landing,
                danger_counter: st.danger_counter,
                setpoint: cmd.setpoint(),
            });
        }
        cmd
    }

    /// One control cycle: apply queued messages, advance the mode, emit a command.
    pub fn step(&mut self, vehicle: Vec3, now: f64) -> Command {
        while let Ok(msg) = self.queue_rx.try_recv() {
            self.on_bbox_message(&msg);
        }
        self.mode_advance(vehicle, now);
        self.tick(now)
    }
}

fn raised(p: Vec3, dz: f64) -> Vec3 {
    Vec3::new(p.x, p.y, p.z + dz)
}

/// Writes the transition log as JSON lines.
pub fn write_transition_log<W: std::io::Write>(
    log: &[TransitionRecord],
    mut out: W,
) -> std::io::Result<()> {
    for r in log {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::messaging::BoxDist;

    fn perception() -> Perception {
        Perception {
            camera: CameraPose::new(0.0, 0.0, 0.0),
            image: ImageDims::square(640).unwrap(),
        }
    }

    fn controller(cfg: ControllerConfig) -> MissionController {
        MissionController::new(
            cfg,
            LandingParams::default(),
            SolverConfig::default(),
            perception(),
        )
        .unwrap()
    }

    fn at_prelanding(cfg: ControllerConfig) -> MissionController {
        let mut c = controller(cfg);
        let takeoff = c.cfg.takeoff_position;
        c.mode_advance(takeoff, 0.0);
        c.mode_advance(takeoff, 0.0);
        assert_eq!(c.state.mode, FlightMode::Prelanding);
        c
    }

    fn person_box(dist: f64, cx: f64) -> BoxDist {
        BoxDist {
            cx,
            cy: 0.3,
            w: 0.05,
            h: 0.1,
            confidence: 0.9,
            dist,
        }
    }

    fn msg(seq: u64, boxes: Vec<BoxDist>) -> BoundingBoxesDist {
        BoundingBoxesDist {
            seq,
            stamp: seq as f64 / 30.0,
            boxes,
        }
    }

    #[test]
    fn in_zone_box_raises_emergency() {
        let mut c = at_prelanding(ControllerConfig::default());
        c.on_bbox_message(&msg(0, vec![person_box(2.9, 0.5)]));
        assert!(c.state.emergency);
        assert_eq!(c.state.danger_counter, 1);
    }

    #[test]
    fn counter_counts_messages_not_boxes() {
        let mut c = at_prelanding(ControllerConfig::default());
        c.on_bbox_message(&msg(0, vec![person_box(1.0, 0.5), person_box(2.0, 0.4)]));
        assert_eq!(c.state.danger_counter, 1);
    }

    #[test]
    fn far_boxes_leave_state_unchanged() {
        let mut c = at_prelanding(ControllerConfig::default());
        let before = c.state.clone();
        c.on_bbox_message(&msg(0, vec![person_box(3.5, 0.5), person_box(4.0, 0.2)]));
        let mut after = c.state.clone();
        after.last_seq = before.last_seq;
        assert_eq!(after, before);
    }

    #[test]
    fn threshold_shifts_once() {
        let cfg = ControllerConfig {
            danger_threshold: 3,
            ..Default::default()
        };
        let mut c = at_prelanding(cfg);
        let boxes = vec![person_box(1.5, 0.5), person_box(2.0, 0.3)];
        for k in 0..2 {
            c.on_bbox_message(&msg(k, boxes.clone()));
        }
        assert!(!c.state.emergency_landing);
        assert!(c.plan().is_none());
        c.on_bbox_message(&msg(2, boxes.clone()));
        assert!(c.state.emergency_landing);
        let plan = c.plan().unwrap().clone();
        assert_eq!(plan.seq, 2);
        assert_eq!(plan.problem.people.len(), 2);
        let shifted = c.state.prelanding_pos;
        assert!((shifted.xy() - plan.solution.offset).norm() < 1e-12);
        for p in &plan.problem.people {
            assert!(shifted.xy().distance(*p) >= 0.5 - 1e-6);
        }

        c.on_bbox_message(&msg(3, vec![person_box(0.6, 0.9)]));
        assert_eq!(c.state.prelanding_pos, shifted);
        assert_eq!(c.plan().unwrap().seq, 2);
    }

    #[test]
    fn retreat_while_hovering() {
        let mut c = at_prelanding(ControllerConfig::default());
        assert_eq!(c.tick(0.0), Command::Setpoint(Vec3::new(0.0, 0.0, 2.0)));
        c.on_bbox_message(&msg(0, vec![person_box(2.0, 0.5)]));
        assert_eq!(c.tick(0.05), Command::Setpoint(Vec3::new(0.0, 0.0, 4.0)));
    }

    #[test]
    fn hover_lock_blocks_landing() {
        let mut c = at_prelanding(ControllerConfig {
            prelanding_dwell: 0.0,
            ..Default::default()
        });
        c.on_bbox_message(&msg(0, vec![person_box(2.0, 0.5)]));
        for k in 0..1000 {
            c.mode_advance(c.cfg.prelanding_pos, k as f64);
            assert_eq!(c.state.mode, FlightMode::Prelanding);
        }
    }

    #[test]
    fn lands_at_shifted_point() {
        let mut c = at_prelanding(ControllerConfig {
            danger_threshold: 1,
            ..Default::default()
        });
        c.on_bbox_message(&msg(0, vec![person_box(1.0, 0.5)]));
        let target = c.state.prelanding_pos;
        c.mode_advance(c.cfg.prelanding_pos, 1.0);
        assert_eq!(c.state.mode, FlightMode::Prelanding);
        c.mode_advance(target, 1.0);
        assert_eq!(c.state.mode, FlightMode::Landing);
        assert_eq!(c.tick(1.0), Command::Land);
    }

    #[test]
    fn nominal_landing_waits_for_dwell() {
        let mut c = at_prelanding(ControllerConfig {
            prelanding_dwell: 2.0,
            ..Default::default()
        });
        let p = c.cfg.prelanding_pos;
        c.mode_advance(p, 10.0);
        c.mode_advance(p, 11.9);
        assert_eq!(c.state.mode, FlightMode::Prelanding);
        c.mode_advance(p, 12.0);
        assert_eq!(c.state.mode, FlightMode::Landing);
    }

    #[test]
    fn waypoints_in_order() {
        let wps = vec![Vec3::new(1.0, 0.0, 2.0), Vec3::new(1.0, 1.0, 2.0)];
        let mut c = controller(ControllerConfig {
            waypoints: wps.clone(),
            ..Default::default()
        });
        c.mode_advance(Vec3::new(0.0, 0.0, 1.95), 0.0);
        assert_eq!(c.state.mode, FlightMode::Mission);
        assert_eq!(c.tick(0.0), Command::Setpoint(wps[0]));
        c.mode_advance(wps[1], 0.0);
        assert_eq!(c.state.waypoint_index, 0, "must visit in order");
        c.mode_advance(Vec3::new(1.1, 0.0, 2.0), 0.0);
        assert_eq!(c.tick(0.0), Command::Setpoint(wps[1]));
        c.mode_advance(wps[1], 0.0);
        assert_eq!(c.state.mode, FlightMode::Prelanding);
    }

    #[test]
    fn messages_outside_prelanding_are_ignored() {
        let mut c = controller(ControllerConfig::default());
        assert_eq!(
            c.on_bbox_message(&msg(0, vec![person_box(1.0, 0.5)])),
            MessageOutcome::Ignored
        );
        assert!(!c.state.emergency);
    }

    #[test]
    fn malformed_messages_are_counted() {
        let mut c = at_prelanding(ControllerConfig::default());
        let mut bad = msg(0, vec![person_box(1.0, 0.5)]);
        bad.boxes[0].dist = f64::NAN;
        assert_eq!(c.on_bbox_message(&bad), MessageOutcome::Dropped);
        c.on_bbox_message(&msg(5, vec![]));
        assert_eq!(c.on_bbox_message(&msg(5, vec![])), MessageOutcome::Dropped);
        assert_eq!(c.diagnostics().malformed, 2);
        assert!(!c.state.emergency);
    }

    #[test]
    fn emergency_clears_after_quiet_messages() {
        let mut c = at_prelanding(ControllerConfig {
            clear_after: Some(3),
            ..Default::default()
        });
        c.on_bbox_message(&msg(0, vec![person_box(1.0, 0.5)]));
        for k in 1..3 {
            c.on_bbox_message(&msg(k, vec![]));
            assert!(c.state.emergency);
        }
        c.on_bbox_message(&msg(3, vec![]));
        assert!(!c.state.emergency);
        assert_eq!(c.state.danger_counter, 0);
    }

    #[test]
    fn literal_mode_never_clears() {
        let mut c = at_prelanding(ControllerConfig {
            clear_after: None,
            ..Default::default()
        });
        c.on_bbox_message(&msg(0, vec![person_box(1.0, 0.5)]));
        let mut last = c.state.danger_counter;
        for k in 1..200 {
            let boxes = if k % 3 == 0 {
                vec![person_box(2.0, 0.5)]
            } else {
                vec![]
            };
            c.on_bbox_message(&msg(k, boxes));
            assert!(c.state.emergency);
            assert!(c.state.danger_counter >= last);
            last = c.state.danger_counter;
        }
    }

    #[test]
    fn forced_emergency_replans_on_next_message() {
        let mut c = at_prelanding(ControllerConfig::default());
        c.force_emergency();
        c.on_bbox_message(&msg(0, vec![person_box(3.5, 0.5)]));
        assert!(c.state.emergency && c.state.emergency_landing);
        assert!(c.plan().unwrap().problem.people.is_empty());
        assert_eq!(c.state.prelanding_pos.xy(), WorldPoint2D::ORIGIN);
    }

    #[test]
    fn inbox_is_drained_on_step() {
        let mut c = at_prelanding(ControllerConfig::default());
        let inbox = c.inbox();
        std::thread::spawn(move || {
            for k in 0..10 {
                inbox.push(msg(k, vec![person_box(1.0, 0.5)]));
            }
        })
        .join()
        .unwrap();
        assert_eq!(c.state.danger_counter, 0);
        c.step(c.cfg.prelanding_pos, 0.0);
        assert_eq!(c.state.danger_counter, 10);
    }

    #[test]
    fn transition_log_records_changes() {
        let mut c = controller(ControllerConfig::default());
        let p = c.cfg.takeoff_position;
        c.step(Vec3::new(0.0, 0.0, 0.0), 0.0);
        c.step(Vec3::new(0.0, 0.0, 0.0), 0.05);
        c.step(p, 0.1);
        c.step(p, 0.15);
        let modes: Vec<FlightMode> = c.transition_log().iter().map(|r| r.mode).collect();
        assert_eq!(
            modes,
            vec![
                FlightMode::Takeoff,
                FlightMode::Mission,
                FlightMode::Prelanding
            ]
        );
        let mut buf = Vec::new();
        write_transition_log(c.transition_log(), &mut buf).unwrap();
        let first = String::from_utf8(buf)
            .unwrap()
            .lines()
            .next()
            .unwrap()
            .to_string();
        assert_eq!(
            first,
            r#"{"t":0.0,"mode":"TAKEOFF","emergency":false,"emergency_landing":false,"danger_counter":0,"setpoint":{"x":0.0,"y":0.0,"z":2.0}}"#
        );
    }

    #[test]
    fn config_validation() {
        let bad = ControllerConfig {
            prelanding_pos: Vec3::new(0.0, 0.0, 0.0),
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = ControllerConfig {
            clear_after: Some(0),
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert!(ControllerConfig::default().validate().is_ok());
    }
}
