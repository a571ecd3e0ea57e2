//! Closed-loop simulation: ground camera, walking people, synthetic detector,
//! vehicle kinematics and the lockstep runner tying them to the controller.

mod camera;
mod dataset;
mod detector;
mod kinematics;
mod pedestrian;
mod run;
mod scenario;

pub use camera::{FisheyeCamera, PixelBox};
pub use dataset::{generate_dataset, DatasetConfig};
pub use detector::{
    frame_rng, synth_detections, BoxSource, Detections, DistanceEstimator, NoiseModel,
};
pub use kinematics::{step_landing, step_uav, Kinematics, UavState};
pub use pedestrian::{project_person, project_person_px, true_distance, Pedestrian, TimedPoint};
pub use run::{
    resolve_estimator, run_scenario, LinkStats, PersonTruth, PublishOutcome, RunEnd,
    SimulationTrace, TraceRecord, Transport,
};
pub use scenario::{DistanceSpec, Rates, Scenario};

use thiserror::Error;

use crate::distance::GbdtError;
use crate::messaging::MessagingError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("scenario JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] GbdtError),
    #[error(transparent)]
    Link(#[from] MessagingError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
