//! Emergency landing-spot selection.
//!
//! Everything is solved in the camera-relative frame: the decision variable is
//! an offset `o` from the hover/camera position `X_c`. The landing point
//! `X_c + o` must stay inside the search disc (`‖o‖ ≤ r_l`) and outside every
//! person's danger disc (`‖X_c + o − X_i‖ ≥ r_d`). Among those points we
//! maximize the weighted sum of distances to the people,
//!
//! ```text
//! Σ_i ‖X_c + o − X_i‖ / max(‖X_i − X_c‖, ε_c)^α
//! ```
//!
//! The objective is convex, so its maxima sit on the boundary of the feasible
//! set; [`solve`] runs a local SQP from several boundary-biased starts and
//! [`oracle_solve`] enumerates a grid as an independent check.

mod oracle;
mod sqp;

pub use oracle::oracle_solve;
pub use sqp::solve;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::WorldPoint2D;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LandingError {
    #[error("invalid landing parameters: {0}")]
    BadParams(String),
    #[error("person {index} at {distance:.3} m is outside the {r_s} m scan zone")]
    OutsideScanZone {
        index: usize,
        distance: f64,
        r_s: f64,
    },
    #[error("non-finite coordinate in problem")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandingParams {
    /// Search-zone radius, meters.
    pub r_l: f64,
    /// Scan-zone radius, meters.
    pub r_s: f64,
    /// Danger-zone radius around each person, meters.
    pub r_d: f64,
    /// Proximity weighting exponent.
    pub alpha: f64,
}

impl Default for LandingParams {
    fn default() -> Self {
        Self {
            r_l: 1.0,
            r_s: 3.0,
            r_d: 0.5,
            alpha: 0.0,
        }
    }
}

impl LandingParams {
    pub fn validate(&self) -> Result<(), LandingError> {
        let all_finite = [self.r_l, self.r_s, self.r_d, self.alpha]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(LandingError::BadParams("values must be finite".into()));
        }
        if !(self.r_l > 0.0 && self.r_l <= self.r_s) {
            return Err(LandingError::BadParams(format!(
                "need 0 < r_l <= r_s, got r_l={} r_s={}",
                self.r_l, self.r_s
            )));
        }
        if self.r_d < 0.0 || self.alpha < 0.0 {
            return Err(LandingError::BadParams("r_d and alpha must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandingProblem {
    pub people: Vec<WorldPoint2D>,
    pub camera: WorldPoint2D,
    pub params: LandingParams,
}

impl LandingProblem {
    pub fn new(people: Vec<WorldPoint2D>, camera: WorldPoint2D, params: LandingParams) -> Self {
        Self {
            people,
            camera,
            params,
        }
    }

    /// Keeps only the people inside the scan zone.
    pub fn from_detections(
        detected: impl IntoIterator<Item = WorldPoint2D>,
        camera: WorldPoint2D,
        params: LandingParams,
    ) -> Self {
        let people = detected
            .into_iter()
            .filter(|p| p.distance(camera) <= params.r_s)
            .collect();
        Self::new(people, camera, params)
    }

    pub fn validate(&self) -> Result<(), LandingError> {
        self.params.validate()?;
        if !self.camera.is_finite() || self.people.iter().any(|p| !p.is_finite()) {
            return Err(LandingError::NonFinite);
        }
        for (index, p) in self.people.iter().enumerate() {
            let distance = p.distance(self.camera);
            if distance > self.params.r_s {
                return Err(LandingError::OutsideScanZone {
                    index,
                    distance,
                    r_s: self.params.r_s,
                });
            }
        }
        Ok(())
    }

    /// People relative to the camera.
    pub(crate) fn relative_people(&self) -> Vec<WorldPoint2D> {
        self.people.iter().map(|&p| p - self.camera).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandingSolution {
    /// Landing point relative to the camera.
    pub offset: WorldPoint2D,
    pub objective: f64,
    pub feasible: bool,
    pub fallback_used: bool,
}

impl LandingSolution {
    pub fn landing_point(&self, problem: &LandingProblem) -> WorldPoint2D {
        problem.camera + self.offset
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Constraint tolerance, meters.
    pub tol: f64,
    /// Deterministic local-solver starts: the center plus `n_starts - 1` ring points.
    pub n_starts: usize,
    pub max_iter: usize,
    /// Floor on person-to-camera distance in the weights, meters.
    pub weight_floor: f64,
    /// Grid step of the max-min-distance fallback, meters.
    pub fallback_grid: f64,
    /// Objectives within this relative gap are treated as ties.
    pub tie_rel: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            n_starts: 16,
            max_iter: 200,
            weight_floor: 0.05,
            fallback_grid: 0.02,
            tie_rel: 1e-9,
        }
    }
}

/// Per-person weights `1 / max(‖p_i‖, ε_c)^α`, `p_i` camera-relative.
pub(crate) fn weights(rel_people: &[WorldPoint2D], alpha: f64, floor: f64) -> Vec<f64> {
    rel_people
        .iter()
        .map(|p| 1.0 / p.norm().max(floor).powf(alpha))
        .collect()
}

pub(crate) fn weighted_distance_sum(
    offset: WorldPoint2D,
    rel_people: &[WorldPoint2D],
    w: &[f64],
) -> f64 {
    rel_people
        .iter()
        .zip(w)
        .map(|(p, wi)| wi * offset.distance(*p))
        .sum()
}

/// Landing objective at `offset` (camera-relative).
pub fn objective(offset: WorldPoint2D, problem: &LandingProblem) -> f64 {
    objective_with(offset, problem, &SolverConfig::default())
}

pub fn objective_with(offset: WorldPoint2D, problem: &LandingProblem, cfg: &SolverConfig) -> f64 {
    let rel = problem.relative_people();
    let w = weights(&rel, problem.params.alpha, cfg.weight_floor);
    weighted_distance_sum(offset, &rel, &w)
}

/// Largest constraint violation in meters (≤ 0 when feasible).
pub fn max_violation(offset: WorldPoint2D, problem: &LandingProblem) -> f64 {
    violation_rel(offset, &problem.relative_people(), &problem.params)
}

pub(crate) fn violation_rel(o: WorldPoint2D, rel: &[WorldPoint2D], params: &LandingParams) -> f64 {
    rel.iter()
        .map(|p| params.r_d - o.distance(*p))
        .fold(o.norm() - params.r_l, f64::max)
}

/// True when `a` should replace the incumbent `b`: clearly better objective,
/// or a tie broken toward smaller polar angle, then smaller radius.
pub(crate) fn prefer(a: (f64, WorldPoint2D), b: (f64, WorldPoint2D), tie_rel: f64) -> bool {
    let scale = a.0.abs().max(b.0.abs()).max(1.0);
    let gap = a.0 - b.0;
    if gap > tie_rel * scale {
        return true;
    }
    if gap < -tie_rel * scale {
        return false;
    }
    let (ta, tb) = (a.1.polar_angle(), b.1.polar_angle());
    if (ta - tb).abs() > 1e-9 {
        return ta < tb;
    }
    a.1.norm() < b.1.norm()
}

/// Safest-possible point when no feasible landing spot exists: maximizes the
/// distance to the nearest person over a grid on the search disc.
pub(crate) fn fallback(problem: &LandingProblem, cfg: &SolverConfig) -> LandingSolution {
    let rel = problem.relative_people();
    let step = cfg.fallback_grid;
    let r_l = problem.params.r_l;
    let mut best: Option<(f64, WorldPoint2D)> = None;
    for o in oracle::disc_grid(r_l, step) {
        let clearance = rel
            .iter()
            .map(|p| o.distance(*p))
            .fold(f64::INFINITY, f64::min);
        if best.is_none_or(|b| prefer((clearance, o), b, cfg.tie_rel)) {
            best = Some((clearance, o));
        }
    }
    let offset = best.map(|b| b.1).unwrap_or(WorldPoint2D::ORIGIN);
    LandingSolution {
        offset,
        objective: objective_with(offset, problem, cfg),
        feasible: false,
        fallback_used: true,
    }
}

/// Circle in the camera-relative frame.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Circle {
    pub center: WorldPoint2D,
    pub radius: f64,
}

pub(crate) fn circle_intersections(a: Circle, b: Circle) -> Vec<WorldPoint2D> {
    let d = a.center.distance(b.center);
    if d < 1e-15 || d > a.radius + b.radius || d < (a.radius - b.radius).abs() {
        return Vec::new();
    }
    let along = (d * d + a.radius * a.radius - b.radius * b.radius) / (2.0 * d);
    let h = (a.radius * a.radius - along * along).max(0.0).sqrt();
    let u = (b.center - a.center) * (1.0 / d);
    let base = a.center + u * along;
    let perp = WorldPoint2D::new(-u.y, u.x);
    if h == 0.0 {
        vec![base]
    } else {
        vec![base + perp * h, base - perp * h]
    }
}

/// Points that witness feasibility if any feasible point exists: all pairwise
/// intersections of the boundary circles, plus four points on each circle.
pub(crate) fn boundary_witnesses(
    rel: &[WorldPoint2D],
    params: &LandingParams,
) -> Vec<WorldPoint2D> {
    let mut circles = vec![Circle {
        center: WorldPoint2D::ORIGIN,
        radius: params.r_l,
    }];
    if params.r_d > 0.0 {
        circles.extend(rel.iter().map(|&center| Circle {
            center,
            radius: params.r_d,
        }));
    }
    let mut out = Vec::new();
    for (i, a) in circles.iter().enumerate() {
        for b in &circles[i + 1..] {
            out.extend(circle_intersections(*a, *b));
        }
        for k in 0..4 {
            let t = k as f64 * std::f64::consts::FRAC_PI_2;
            out.push(a.center + WorldPoint2D::new(t.cos(), t.sin()) * a.radius);
        }
    }
    out
}
