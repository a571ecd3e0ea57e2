//! Run summary derived from a stored trace and nothing else.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use padguard_core::geometry::ImagePoint;
use padguard_core::messaging::ChannelStats;
use padguard_core::mission::Diagnostics;
use padguard_core::sim::{BoxSource, LinkStats, PublishOutcome, RunEnd, Scenario, TraceRecord};
use padguard_core::{image_to_campix, localize_person, FlightMode, SimulationTrace, WorldPoint2D};

use crate::metrics::{eval_localization, LocalizationEval, MATCH_WINDOW};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("trace has no header record")]
    NoHeader,
    #[error("trace has no summary record")]
    NoSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSummary {
    pub seq: u64,
    pub stamp: f64,
    pub people: Vec<WorldPoint2D>,
    /// Selected landing point relative to the hover point.
    pub offset: WorldPoint2D,
    pub landing_point: WorldPoint2D,
    pub objective: f64,
    pub feasible: bool,
    pub fallback_used: bool,
    /// Distance from the landing point to the nearest person in the snapshot.
    pub min_snapshot_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario_id: String,
    pub seed: u64,
    pub end: RunEnd,
    pub touchdown: Option<WorldPoint2D>,
    pub touchdown_time: Option<f64>,
    /// Distance from the touchdown point to the nearest pedestrian at touchdown.
    pub min_person_distance: Option<f64>,
    pub retreat_events: u32,
    pub emergency_landing: bool,
    pub plan: Option<PlanSummary>,
    pub localization: Option<LocalizationEval>,
    pub channel: ChannelStats,
    pub link: LinkStats,
    pub diagnostics: Option<Diagnostics>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn min_distance(p: WorldPoint2D, people: impl IntoIterator<Item = WorldPoint2D>) -> Option<f64> {
    people
        .into_iter()
        .map(|q| p.distance(q))
        .min_by(f64::total_cmp)
}

/// Scores the ground-side localization of every pedestrian over the sent messages.
pub fn localization_from_trace(trace: &SimulationTrace, sc: &Scenario) -> Option<LocalizationEval> {
    let dims = sc.camera.dims();
    let size = sc.camera.image_size as f64;
    let cam = sc.camera.pose;
    let mut predicted: BTreeMap<u32, Vec<(f64, Option<WorldPoint2D>)>> = BTreeMap::new();
    let mut truth: BTreeMap<u32, Vec<(f64, WorldPoint2D)>> = BTreeMap::new();
    for p in &sc.pedestrians {
        predicted.insert(p.id, Vec::new());
        truth.insert(p.id, Vec::new());
    }
    for r in &trace.records {
        match r {
            TraceRecord::Truth { t, people } => {
                for p in people {
                    truth
                        .entry(p.id)
                        .or_default()
                        .push((*t, WorldPoint2D::new(p.x, p.y)));
                }
            }
            TraceRecord::Message {
                t,
                outcome: PublishOutcome::Sent,
                msg,
                sources,
            } => {
                for (id, track) in predicted.iter_mut() {
                    let found = msg
                        .boxes
                        .iter()
                        .zip(sources)
                        .find(|(_, s)| **s == BoxSource::Person(*id))
                        .and_then(|(b, _)| {
                            let c =
                                image_to_campix(ImagePoint::new(b.cx * size, b.cy * size), dims)
                                    .ok()?;
                            Some(localize_person(c, b.dist, &cam).position)
                        });
                    track.push((*t, found));
                }
            }
            _ => {}
        }
    }
    predicted
        .iter()
        .filter_map(|(id, pred)| {
            eval_localization(pred, truth.get(id)?, cam.position(), MATCH_WINDOW).ok()
        })
        .reduce(LocalizationEval::merge)
}

fn count_retreats(trace: &SimulationTrace) -> u32 {
    let mut hovering = false;
    let mut n = 0;
    for r in trace.transitions() {
        let now = r.mode == FlightMode::Prelanding && r.emergency && !r.emergency_landing;
        if now && !hovering {
            n += 1;
        }
        hovering = now;
    }
    n
}

pub fn build_report(trace: &SimulationTrace) -> Result<RunReport, ReportError> {
    let sc = trace.scenario().ok_or(ReportError::NoHeader)?;
    let (end, channel, link, diagnostics) = trace
        .records
        .iter()
        .find_map(|r| match r {
            TraceRecord::Summary {
                end,
                channel,
                link,
                diagnostics,
            } => Some((*end, *channel, *link, *diagnostics)),
            _ => None,
        })
        .ok_or(ReportError::NoSummary)?;
    let touchdown = trace.touchdown();
    let min_person_distance = touchdown
        .and_then(|(t, at)| min_distance(at, sc.pedestrians.iter().map(|p| p.position_at(t))));
    let plan = trace.plan().map(|p| PlanSummary {
        seq: p.seq,
        stamp: p.stamp,
        people: p.problem.people.clone(),
        offset: p.solution.offset,
        landing_point: p.landing_point,
        objective: p.solution.objective,
        feasible: p.solution.feasible,
        fallback_used: p.solution.fallback_used,
        min_snapshot_distance: min_distance(p.landing_point, p.problem.people.iter().copied()),
    });
    Ok(RunReport {
        scenario_id: sc.id.clone(),
        seed: sc.seed,
        end,
        touchdown: touchdown.map(|(_, p)| p),
        touchdown_time: touchdown.map(|(t, _)| t),
        min_person_distance,
        retreat_events: count_retreats(trace),
        emergency_landing: plan.is_some(),
        plan,
        localization: localization_from_trace(trace, sc),
        channel,
        link,
        diagnostics,
    })
}
