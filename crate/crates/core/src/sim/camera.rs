use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::distance::BBoxFeatures;
use crate::geometry::{
    campix_to_image, CamPixPoint, CameraPose, ImageDims, ImagePoint, WorldPoint2D,
};

/// Upward-looking equidistant fisheye: image radius `r = f·θ_z`, where `θ_z`
/// is the angle from the zenith.
///
/// The focal coefficient is chosen so that the edge of the field of view
/// touches the image border.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisheyeCamera {
    pub image_size: u32,
    /// Full field of view, degrees.
    pub fov_deg: f64,
    /// Lens height above the ground, meters.
    pub mount_height: f64,
    pub pose: CameraPose,
}

impl Default for FisheyeCamera {
    fn default() -> Self {
        Self {
            image_size: 640,
            fov_deg: 220.0,
            mount_height: 0.2,
            pose: CameraPose::new(0.0, 0.0, 0.0),
        }
    }
}

/// Axis-aligned box in image pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelBox {
    pub xmin: f64,
    pub ymin: f64,
    pub xmax: f64,
    pub ymax: f64,
}

impl PixelBox {
    pub fn center(&self) -> ImagePoint {
        ImagePoint::new((self.xmin + self.xmax) / 2.0, (self.ymin + self.ymax) / 2.0)
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn to_features(&self, image_size: u32) -> BBoxFeatures {
        let s = image_size as f64;
        let c = self.center();
        BBoxFeatures {
            cx: c.x / s,
            cy: c.y / s,
            w: self.width() / s,
            h: self.height() / s,
        }
    }
}

impl FisheyeCamera {
    pub fn fov(&self) -> f64 {
        self.fov_deg.to_radians()
    }

    /// Pixels per radian.
    pub fn focal(&self) -> f64 {
        (self.image_size as f64 / 2.0) / (self.fov() / 2.0)
    }

    pub fn dims(&self) -> ImageDims {
        ImageDims::square(self.image_size).expect("validated size")
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.image_size == 0 {
            return Err(SimError::Invalid(
                "camera.image_size must be positive".into(),
            ));
        }
        let fov = self.fov();
        if !(fov > PI && fov <= 1.35 * PI) {
            return Err(SimError::Invalid(format!(
                "camera.fov_deg must be in (180, 243], got {}",
                self.fov_deg
            )));
        }
        if !(self.mount_height.is_finite() && self.mount_height >= 0.0) {
            return Err(SimError::Invalid("camera.mount_height must be >= 0".into()));
        }
        if !(self.pose.x.is_finite() && self.pose.y.is_finite() && self.pose.yaw_offset.is_finite())
        {
            return Err(SimError::Invalid("camera.pose must be finite".into()));
        }
        Ok(())
    }

    /// Image position of a world point, or `None` outside the field of view.
    pub fn project(&self, p: WorldPoint2D, z: f64) -> Option<ImagePoint> {
        let rel = (p - self.pose.position()).rotated(-self.pose.yaw_offset);
        let theta = rel.norm().atan2(z - self.mount_height);
        if theta > self.fov() / 2.0 {
            return None;
        }
        let r = self.focal() * theta;
        let phi = rel.y.atan2(rel.x);
        Some(campix_to_image(
            CamPixPoint::new(r * phi.cos(), r * phi.sin()),
            self.dims(),
        ))
    }
}
