use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::camera::FisheyeCamera;
use super::detector::perturb;
use super::pedestrian::{project_person_px, Pedestrian};
use super::SimError;
use crate::distance::Sample;
use crate::geometry::WorldPoint2D;

/// Labelled boxes of people standing at random places around the camera.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetConfig {
    pub samples: usize,
    pub min_distance: f64,
    pub max_distance: f64,
    pub pixel_sigma: f64,
    pub height_min: f64,
    pub height_max: f64,
    pub camera: FisheyeCamera,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            samples: 5000,
            min_distance: 0.5,
            max_distance: 5.0,
            pixel_sigma: 1.0,
            height_min: 1.7,
            height_max: 1.7,
            camera: FisheyeCamera::default(),
        }
    }
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        self.camera.validate()?;
        if !(self.min_distance >= 0.0
            && self.min_distance < self.max_distance
            && self.max_distance.is_finite())
        {
            return Err(SimError::Invalid(
                "dataset: need 0 <= min_distance < max_distance".into(),
            ));
        }
        if !(self.height_min > 0.0
            && self.height_min <= self.height_max
            && self.height_max.is_finite())
        {
            return Err(SimError::Invalid(
                "dataset: need 0 < height_min <= height_max".into(),
            ));
        }
        if !(self.pixel_sigma.is_finite() && self.pixel_sigma >= 0.0) {
            return Err(SimError::Invalid(
                "dataset: pixel_sigma must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Distances are uniform in `[min_distance, max_distance]`, bearings uniform.
pub fn generate_dataset(cfg: &DatasetConfig, seed: u64) -> Result<Vec<Sample>, SimError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cam = &cfg.camera;
    let mut out = Vec::with_capacity(cfg.samples);
    while out.len() < cfg.samples {
        let d = rng.random_range(cfg.min_distance..=cfg.max_distance);
        let a = rng.random_range(0.0..TAU);
        let height = if cfg.height_max > cfg.height_min {
            rng.random_range(cfg.height_min..=cfg.height_max)
        } else {
            cfg.height_min
        };
        let at = cam.pose.position() + WorldPoint2D::new(a.cos(), a.sin()) * d;
        let mut p = Pedestrian::standing(0, at);
        p.height = height;
        let Some(px) = project_person_px(cam, &p, 0.0) else {
            continue;
        };
        let f = perturb(px, cfg.pixel_sigma, cam.image_size, &mut rng).to_features(cam.image_size);
        if !f.is_valid() {
            continue;
        }
        out.push(Sample {
            features: f,
            distance: d,
        });
    }
    Ok(out)
}
