use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::camera::{FisheyeCamera, PixelBox};
use super::SimError;
use crate::distance::BBoxFeatures;
use crate::geometry::WorldPoint2D;

/// Samples around the cylinder at each of the foot and head rings.
const RING_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimedPoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

fn default_height() -> f64 {
    1.7
}

fn default_radius() -> f64 {
    0.25
}

/// A person modelled as an upright cylinder moving along straight segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pedestrian {
    pub id: u32,
    /// Waypoints with increasing time. The person stands still before the
    /// first and after the last.
    pub trajectory: Vec<TimedPoint>,
    #[serde(default = "default_height")]
    pub height: f64,
    #[serde(default = "default_radius")]
    pub radius: f64,
}

impl Pedestrian {
    pub fn standing(id: u32, at: WorldPoint2D) -> Self {
        Self {
            id,
            trajectory: vec![TimedPoint {
                t: 0.0,
                x: at.x,
                y: at.y,
            }],
            height: default_height(),
            radius: default_radius(),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |what: &str| Err(SimError::Invalid(format!("pedestrian {}: {what}", self.id)));
        if self.trajectory.is_empty() {
            return bad("empty trajectory");
        }
        if self
            .trajectory
            .iter()
            .any(|p| !(p.t.is_finite() && p.x.is_finite() && p.y.is_finite()))
        {
            return bad("non-finite waypoint");
        }
        if self.trajectory.windows(2).any(|w| w[1].t <= w[0].t) {
            return bad("waypoint times must increase");
        }
        if !(self.height.is_finite() && self.height > 0.0) {
            return bad("height must be positive");
        }
        if !(self.radius.is_finite() && self.radius >= 0.0) {
            return bad("radius must be >= 0");
        }
        Ok(())
    }

    pub fn position_at(&self, t: f64) -> WorldPoint2D {
        let tr = &self.trajectory;
        let first = tr[0];
        if t <= first.t {
            return WorldPoint2D::new(first.x, first.y);
        }
        for w in tr.windows(2) {
            let (a, b) = (w[0], w[1]);
            if t <= b.t {
                let u = (t - a.t) / (b.t - a.t);
                return WorldPoint2D::new(a.x + u * (b.x - a.x), a.y + u * (b.y - a.y));
            }
        }
        let last = tr[tr.len() - 1];
        WorldPoint2D::new(last.x, last.y)
    }
}

/// Pixel box of the person's projected cylinder samples.
///
/// Samples start at the person's azimuth seen from the camera, so the sample
/// pattern is symmetric about the bearing line.
pub fn project_person_px(cam: &FisheyeCamera, p: &Pedestrian, t: f64) -> Option<PixelBox> {
    let center = p.position_at(t);
    let az = (center - cam.pose.position()).polar_angle();
    let mut bbox: Option<PixelBox> = None;
    for z in [0.0, p.height] {
        for k in 0..RING_SAMPLES {
            let a = az + TAU * k as f64 / RING_SAMPLES as f64;
            let s = center + WorldPoint2D::new(a.cos(), a.sin()) * p.radius;
            let Some(q) = cam.project(s, z) else { continue };
            let b = bbox.get_or_insert(PixelBox {
                xmin: q.x,
                ymin: q.y,
                xmax: q.x,
                ymax: q.y,
            });
            b.xmin = b.xmin.min(q.x);
            b.ymin = b.ymin.min(q.y);
            b.xmax = b.xmax.max(q.x);
            b.ymax = b.ymax.max(q.y);
        }
    }
    bbox
}

pub fn project_person(cam: &FisheyeCamera, p: &Pedestrian, t: f64) -> Option<BBoxFeatures> {
    project_person_px(cam, p, t).map(|b| b.to_features(cam.image_size))
}

/// Horizontal distance from the person's axis to the camera.
pub fn true_distance(cam: &FisheyeCamera, p: &Pedestrian, t: f64) -> f64 {
    p.position_at(t).distance(cam.pose.position())
}
