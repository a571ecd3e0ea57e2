//! Ground-camera safe-landing pipeline.
//!
//! Detections from an upward-looking fisheye camera are turned into person
//! positions, a mission state machine decides when the pad is unsafe, and a
//! constrained optimizer picks a new touchdown point when hovering has gone on
//! too long. [`sim`] closes the loop with a synthetic world.

pub mod distance;
pub mod geometry;
pub mod landing;
pub mod messaging;
pub mod mission;
pub mod sim;

pub use distance::{fit, BBoxFeatures, GbdtHyperParams, GbdtModel, RegressionMetrics, Sample};
pub use geometry::{
    image_to_campix, localize_person, CamPixPoint, CameraPose, ImageDims, ImagePoint, Vec3,
    WorldPoint2D,
};
pub use landing::{
    oracle_solve, solve, LandingParams, LandingProblem, LandingSolution, SolverConfig,
};
pub use messaging::{BoundingBoxesDist, BoxDist, ChannelStats};
pub use mission::{Command, ControllerConfig, FlightMode, MissionController, TransitionRecord};
pub use sim::{run_scenario, Scenario, SimulationTrace, Transport};
