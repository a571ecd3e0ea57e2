use serde::{Deserialize, Serialize};

use super::SimError;
use crate::geometry::{Vec3, WorldPoint2D};
use crate::mission::Command;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct UavState {
    pub position: Vec3,
    pub velocity: Vec3,
}

/// First-order position controller standing in for the autopilot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Kinematics {
    /// Proportional gain, 1/s.
    pub gain: f64,
    pub v_max: f64,
    /// Descent speed under the land command.
    pub v_land: f64,
}

impl Default for Kinematics {
    fn default() -> Self {
        Self {
            gain: 1.5,
            v_max: 1.5,
            v_land: 0.5,
        }
    }
}

impl Kinematics {
    pub fn validate(&self) -> Result<(), SimError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !(ok(self.gain) && ok(self.v_max) && ok(self.v_land)) || self.v_land > self.v_max {
            return Err(SimError::Invalid(
                "kinematics: gain, v_max, v_land must be positive and v_land <= v_max".into(),
            ));
        }
        Ok(())
    }
}

fn clamp_speed(v: Vec3, v_max: f64) -> Vec3 {
    let speed = v.norm();
    if speed > v_max {
        v * (v_max / speed)
    } else {
        v
    }
}

/// Advances the vehicle by `dt` seconds toward `cmd`. The land command holds
/// the current horizontal position and descends to the ground.
pub fn step_uav(state: UavState, cmd: &Command, dt: f64, k: &Kinematics) -> UavState {
    match cmd {
        Command::Setpoint(sp) => {
            assert!(dt > 0.0, "dt must be positive");
            let velocity = clamp_speed((*sp - state.position) * k.gain, k.v_max);
            integrate(state.position, velocity, dt)
        }
        Command::Land => step_landing(state, state.position.xy(), dt, k),
    }
}

/// Descends at `v_land` while steering horizontally toward `hold`.
pub fn step_landing(state: UavState, hold: WorldPoint2D, dt: f64, k: &Kinematics) -> UavState {
    assert!(dt > 0.0, "dt must be positive");
    let p = state.position;
    let vz = if p.z > 0.0 { -k.v_land } else { 0.0 };
    let vh = (hold - p.xy()) * k.gain;
    let h_max = (k.v_max * k.v_max - vz * vz).max(0.0).sqrt();
    let vh = if vh.norm() > h_max {
        vh * (h_max / vh.norm())
    } else {
        vh
    };
    integrate(p, Vec3::new(vh.x, vh.y, vz), dt)
}

fn integrate(position: Vec3, velocity: Vec3, dt: f64) -> UavState {
    let mut position = position + velocity * dt;
    let mut velocity = velocity;
    if position.z < 0.0 {
        position.z = 0.0;
        velocity.z = 0.0;
    }
    UavState { position, velocity }
}
