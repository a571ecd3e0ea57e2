use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::camera::{FisheyeCamera, PixelBox};
use super::pedestrian::{project_person_px, true_distance, Pedestrian};
use super::SimError;
use crate::distance::{BBoxFeatures, GbdtModel};
use crate::messaging::{BoundingBoxesDist, BoxDist};

/// Detector imperfections.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    /// Std-dev of the Gaussian noise on box center and size, pixels.
    pub pixel_sigma: f64,
    /// Probability that a visible person is not reported.
    pub miss_rate: f64,
    /// Probability that a message carries one spurious box.
    pub false_positive_rate: f64,
}

impl NoiseModel {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.pixel_sigma.is_finite() && self.pixel_sigma >= 0.0) {
            return Err(SimError::Invalid("noise.pixel_sigma must be >= 0".into()));
        }
        for (name, v) in [
            ("miss_rate", self.miss_rate),
            ("false_positive_rate", self.false_positive_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(SimError::Invalid(format!("noise.{name} must be in [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Where the `dist` field of each box comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DistanceEstimator {
    /// The true horizontal distance of the person that produced the box.
    GroundTruth,
    Model(GbdtModel),
}

impl DistanceEstimator {
    fn estimate(&self, f: &BBoxFeatures, truth: Option<f64>) -> f64 {
        match (self, truth) {
            (DistanceEstimator::GroundTruth, Some(d)) => d,
            // a spurious box has no true distance; report it as far away
            (DistanceEstimator::GroundTruth, None) => f64::from(u16::MAX),
            (DistanceEstimator::Model(m), _) => m.predict(f),
        }
    }
}

/// Origin of one box in a synthesized message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoxSource {
    Person(u32),
    FalsePositive,
}

/// A synthesized message and the origin of each of its boxes.
#[derive(Debug, Clone, PartialEq)]
pub struct Detections {
    pub msg: BoundingBoxesDist,
    pub sources: Vec<BoxSource>,
}

/// Random stream for one detector frame. Streams are independent per tick,
/// so a frame does not depend on how many frames were drawn before it.
pub fn frame_rng(seed: u64, tick: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tick);
    rng
}

pub(crate) fn perturb(b: PixelBox, sigma: f64, size: u32, rng: &mut impl Rng) -> PixelBox {
    if sigma == 0.0 {
        return b;
    }
    let n = Normal::new(0.0, sigma).expect("finite sigma");
    let c = b.center();
    let s = size as f64;
    let cx = (c.x + n.sample(rng)).clamp(0.0, s);
    let cy = (c.y + n.sample(rng)).clamp(0.0, s);
    let w = (b.width() + n.sample(rng)).max(0.0);
    let h = (b.height() + n.sample(rng)).max(0.0);
    PixelBox {
        xmin: cx - w / 2.0,
        ymin: cy - h / 2.0,
        xmax: cx + w / 2.0,
        ymax: cy + h / 2.0,
    }
}

fn clamp_features(f: BBoxFeatures) -> BBoxFeatures {
    BBoxFeatures {
        cx: f.cx.clamp(0.0, 1.0),
        cy: f.cy.clamp(0.0, 1.0),
        w: f.w.clamp(0.0, 1.0),
        h: f.h.clamp(0.0, 1.0),
    }
}

/// One detector frame at time `t`: every visible pedestrian (minus misses),
/// plus an optional false positive, with distances from `estimator`.
#[allow(clippy::too_many_arguments)]
pub fn synth_detections(
    cam: &FisheyeCamera,
    people: &[Pedestrian],
    noise: &NoiseModel,
    estimator: &DistanceEstimator,
    seq: u64,
    t: f64,
    rng: &mut impl Rng,
) -> Detections {
    let mut boxes = Vec::new();
    let mut sources = Vec::new();
    for p in people {
        let Some(px) = project_person_px(cam, p, t) else {
            continue;
        };
        // draw in a fixed order so that the noise of one person does not
        // depend on whether another one was missed
        let missed = rng.random::<f64>() < noise.miss_rate;
        let noisy = perturb(px, noise.pixel_sigma, cam.image_size, rng);
        let confidence = rng.random_range(0.6..1.0);
        if missed {
            continue;
        }
        let f = clamp_features(noisy.to_features(cam.image_size));
        boxes.push(BoxDist {
            cx: f.cx,
            cy: f.cy,
            w: f.w,
            h: f.h,
            confidence,
            dist: estimator.estimate(&f, Some(true_distance(cam, p, t))),
        });
        sources.push(BoxSource::Person(p.id));
    }
    if rng.random::<f64>() < noise.false_positive_rate {
        let f = BBoxFeatures {
            cx: rng.random_range(0.1..0.9),
            cy: rng.random_range(0.1..0.9),
            w: rng.random_range(0.01..0.1),
            h: rng.random_range(0.01..0.1),
        };
        boxes.push(BoxDist {
            cx: f.cx,
            cy: f.cy,
            w: f.w,
            h: f.h,
            confidence: rng.random_range(0.3..0.6),
            dist: estimator.estimate(&f, None),
        });
        sources.push(BoxSource::FalsePositive);
    }
    Detections {
        msg: BoundingBoxesDist {
            seq,
            stamp: t,
            boxes,
        },
        sources,
    }
}
