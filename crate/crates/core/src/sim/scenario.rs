use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::camera::FisheyeCamera;
use super::dataset::DatasetConfig;
use super::detector::NoiseModel;
use super::kinematics::Kinematics;
use super::pedestrian::Pedestrian;
use super::SimError;
use crate::distance::GbdtHyperParams;
use crate::geometry::Vec3;
use crate::landing::{LandingParams, SolverConfig};
use crate::messaging::RATE_CAP_HZ;
use crate::mission::ControllerConfig;

/// Simulation clock and the rates derived from it, all per simulated second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Rates {
    /// Integer tick rate of the simulation clock.
    pub base_hz: u32,
    pub message_hz: u32,
    pub control_hz: u32,
    /// Ground-truth sampling rate for the trace.
    pub truth_hz: u32,
}

impl Default for Rates {
    fn default() -> Self {
        Self {
            base_hz: 600,
            message_hz: 30,
            control_hz: 20,
            truth_hz: 100,
        }
    }
}

impl Rates {
    /// True when an event at `rate` falls on tick `k`. Events are spread as
    /// evenly as the base clock allows.
    pub fn due(&self, k: u64, rate: u32) -> bool {
        (k * rate as u64) % u64::from(self.base_hz) < u64::from(rate)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        for (name, r) in [
            ("message_hz", self.message_hz),
            ("control_hz", self.control_hz),
            ("truth_hz", self.truth_hz),
        ] {
            if r == 0 || r > self.base_hz {
                return Err(SimError::Invalid(format!(
                    "rates.{name} must be in [1, base_hz={}]",
                    self.base_hz
                )));
            }
        }
        if self.message_hz > RATE_CAP_HZ {
            return Err(SimError::Invalid(format!(
                "rates.message_hz {} exceeds the {RATE_CAP_HZ} Hz camera limit",
                self.message_hz
            )));
        }
        Ok(())
    }
}

/// How box distances are produced during a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DistanceSpec {
    GroundTruth,
    /// A model file written by `write_model`; relative paths resolve against
    /// the scenario file.
    Model {
        path: PathBuf,
    },
    /// Train a model on a synthetic dataset before the run.
    Train {
        #[serde(default)]
        dataset: DatasetConfig,
        #[serde(default)]
        hyper: GbdtHyperParams,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    /// Seeds the detector noise. Command-line runs override it.
    #[serde(default)]
    pub seed: u64,
    /// Simulated seconds.
    pub duration: f64,
    #[serde(default)]
    pub rates: Rates,
    #[serde(default)]
    pub camera: FisheyeCamera,
    #[serde(default)]
    pub pedestrians: Vec<Pedestrian>,
    /// Flight plan. Without it only the ground side runs.
    #[serde(default)]
    pub mission: Option<ControllerConfig>,
    #[serde(default)]
    pub landing: LandingParams,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub noise: NoiseModel,
    pub distance: DistanceSpec,
    #[serde(default)]
    pub uav_start: Vec3,
    #[serde(default)]
    pub kinematics: Kinematics,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.id.is_empty() {
            return Err(SimError::Invalid("id must not be empty".into()));
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(SimError::Invalid("duration must be positive".into()));
        }
        self.rates.validate()?;
        self.camera.validate()?;
        let mut ids = BTreeSet::new();
        for p in &self.pedestrians {
            p.validate()?;
            if !ids.insert(p.id) {
                return Err(SimError::Invalid(format!(
                    "duplicate pedestrian id {}",
                    p.id
                )));
            }
        }
        if let Some(m) = &self.mission {
            m.validate().map_err(|e| SimError::Invalid(e.to_string()))?;
        }
        self.landing
            .validate()
            .map_err(|e| SimError::Invalid(e.to_string()))?;
        self.noise.validate()?;
        self.kinematics.validate()?;
        let s = self.uav_start;
        if !(s.x.is_finite() && s.y.is_finite() && s.z.is_finite()) || s.z < 0.0 {
            return Err(SimError::Invalid(
                "uav_start must be finite with z >= 0".into(),
            ));
        }
        match &self.distance {
            DistanceSpec::Train { dataset, hyper, .. } => {
                dataset.validate()?;
                hyper
                    .validate()
                    .map_err(|e| SimError::Invalid(e.to_string()))?;
            }
            DistanceSpec::GroundTruth | DistanceSpec::Model { .. } => {}
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }
}
