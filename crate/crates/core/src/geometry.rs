//! Image, camera and world frames, and bearing+range localization of detections.
//!
//! The ground camera looks straight up. Image coordinates have their origin in
//! the top-left corner with `x` to the right and `y` downward. The camera pixel
//! frame is centered on the optical axis and its axes are swapped and flipped
//! relative to the image axes:
//!
//! ```text
//! x_cam = -y_image + w/2
//! y_cam = -x_image + h/2
//! ```
//!
//! That pairing only makes sense for square frames, so [`ImageDims`] refuses
//! anything else.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Box centers closer than this to the optical axis have no usable bearing.
pub const DEGENERATE_PIX: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("image dimensions must be positive, got {width}x{height}")]
    EmptyFrame { width: u32, height: u32 },
    #[error("image frame must be square, got {width}x{height}")]
    NonSquare { width: u32, height: u32 },
    #[error("point ({x}, {y}) lies outside the {size}x{size} frame")]
    OutsideFrame { x: f64, y: f64, size: u32 },
}

/// A position in the world (landing) frame, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WorldPoint2D {
    pub x: f64,
    pub y: f64,
}

impl WorldPoint2D {
    pub const ORIGIN: WorldPoint2D = WorldPoint2D { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: WorldPoint2D) -> f64 {
        (self - other).norm()
    }

    pub fn dot(self, other: WorldPoint2D) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Polar angle in `[0, 2π)`; the origin reports 0.
    pub fn polar_angle(self) -> f64 {
        if self.x == 0.0 && self.y == 0.0 {
            return 0.0;
        }
        let a = self.y.atan2(self.x);
        if a < 0.0 {
            a + 2.0 * PI
        } else {
            a
        }
    }

    pub fn rotated(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for WorldPoint2D {
    type Output = WorldPoint2D;
    fn add(self, rhs: WorldPoint2D) -> WorldPoint2D {
        WorldPoint2D::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for WorldPoint2D {
    type Output = WorldPoint2D;
    fn sub(self, rhs: WorldPoint2D) -> WorldPoint2D {
        WorldPoint2D::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for WorldPoint2D {
    type Output = WorldPoint2D;
    fn mul(self, rhs: f64) -> WorldPoint2D {
        WorldPoint2D::new(self.x * rhs, self.y * rhs)
    }
}

/// 3D position in the world frame, meters (z up).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn xy(self) -> WorldPoint2D {
        WorldPoint2D::new(self.x, self.y)
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, rhs: f64) -> Vec3 {
        Vec3::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

/// Pixel position in the image, origin top-left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImagePoint {
    pub x: f64,
    pub y: f64,
}

impl ImagePoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Pixel position in the camera frame, origin on the optical axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CamPixPoint {
    pub x: f64,
    pub y: f64,
}

impl CamPixPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Square image frame size in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ImageDims {
    width: u32,
    height: u32,
}

impl ImageDims {
    pub fn new(width: u32, height: u32) -> Result<Self, GeometryError> {
        if width == 0 || height == 0 {
            return Err(GeometryError::EmptyFrame { width, height });
        }
        if width != height {
            return Err(GeometryError::NonSquare { width, height });
        }
        Ok(Self { width, height })
    }

    pub fn square(size: u32) -> Result<Self, GeometryError> {
        Self::new(size, size)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn contains(&self, p: ImagePoint) -> bool {
        (0.0..=self.width as f64).contains(&p.x) && (0.0..=self.height as f64).contains(&p.y)
    }
}

impl<'de> Deserialize<'de> for ImageDims {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            width: u32,
            height: u32,
        }
        let raw = Raw::deserialize(d)?;
        ImageDims::new(raw.width, raw.height).map_err(serde::de::Error::custom)
    }
}

/// Camera placement in the world frame.
///
/// `yaw_offset` is the heading of the camera frame measured in the world frame;
/// rotating a camera-frame vector by it yields the world-frame vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    pub x: f64,
    pub y: f64,
    pub yaw_offset: f64,
}

impl CameraPose {
    pub fn new(x: f64, y: f64, yaw_offset: f64) -> Self {
        Self {
            x,
            y,
            yaw_offset: wrap_angle(yaw_offset),
        }
    }

    pub fn at(position: WorldPoint2D) -> Self {
        Self::new(position.x, position.y, 0.0)
    }

    pub fn position(&self) -> WorldPoint2D {
        WorldPoint2D::new(self.x, self.y)
    }
}

/// Wraps an angle into `[-π, π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w >= PI {
        w - 2.0 * PI
    } else {
        w
    }
}

pub fn image_to_campix(p: ImagePoint, dims: ImageDims) -> Result<CamPixPoint, GeometryError> {
    if !dims.contains(p) {
        return Err(GeometryError::OutsideFrame {
            x: p.x,
            y: p.y,
            size: dims.width,
        });
    }
    Ok(CamPixPoint::new(
        -p.y + dims.width as f64 / 2.0,
        -p.x + dims.height as f64 / 2.0,
    ))
}

/// Inverse of [`image_to_campix`]. Does not clip to the frame.
pub fn campix_to_image(p: CamPixPoint, dims: ImageDims) -> ImagePoint {
    ImagePoint::new(
        dims.height as f64 / 2.0 - p.y,
        dims.width as f64 / 2.0 - p.x,
    )
}

pub fn rotate_to_world(p: CamPixPoint, yaw_offset: f64) -> CamPixPoint {
    let (s, c) = yaw_offset.sin_cos();
    CamPixPoint::new(c * p.x - s * p.y, s * p.x + c * p.y)
}

/// Result of localizing one detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Localization {
    pub position: WorldPoint2D,
    /// The box center sat on the optical axis, so the person was placed at the camera.
    pub at_camera: bool,
}

/// Places a detection at `d_pred` meters from the camera along the bearing of its box center.
pub fn localize_person(box_center: CamPixPoint, d_pred: f64, cam: &CameraPose) -> Localization {
    let d = d_pred.max(0.0);
    let dir = rotate_to_world(box_center, cam.yaw_offset);
    let n = dir.norm();
    if n < DEGENERATE_PIX {
        return Localization {
            position: cam.position(),
            at_camera: true,
        };
    }
    Localization {
        position: WorldPoint2D::new(cam.x + d * dir.x / n, cam.y + d * dir.y / n),
        at_camera: false,
    }
}
