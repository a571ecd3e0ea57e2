//! Localization accuracy against ground truth: average positioning error and
//! cosine similarity of camera-relative directions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use padguard_core::WorldPoint2D;

/// Nearest-timestamp matching window, simulated seconds.
pub const MATCH_WINDOW: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("no prediction could be matched to ground truth")]
    NoMatches,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizationEval {
    /// Mean Euclidean error over matched frames, meters.
    pub ape: f64,
    /// Mean cosine similarity of the directions from the camera.
    pub cossim: f64,
    pub matched: usize,
    pub omitted: usize,
}

impl LocalizationEval {
    /// Pools two evaluations as if their frames had been scored together.
    pub fn merge(self, other: LocalizationEval) -> LocalizationEval {
        let n = self.matched + other.matched;
        let mean = |a: f64, b: f64| {
            if n == 0 {
                0.0
            } else {
                (a * self.matched as f64 + b * other.matched as f64) / n as f64
            }
        };
        LocalizationEval {
            ape: mean(self.ape, other.ape),
            cossim: mean(self.cossim, other.cossim),
            matched: n,
            omitted: self.omitted + other.omitted,
        }
    }
}

fn cosine(a: WorldPoint2D, b: WorldPoint2D) -> f64 {
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 && nb == 0.0 {
        return 1.0;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (a.dot(b) / (na * nb)).clamp(-1.0, 1.0)
}

/// Index of the truth sample nearest to `t`, if within `window`.
fn nearest(truth: &[(f64, WorldPoint2D)], t: f64, window: f64) -> Option<usize> {
    let i = truth.partition_point(|(s, _)| *s < t);
    [i.checked_sub(1), Some(i)]
        .into_iter()
        .flatten()
        .filter(|&j| j < truth.len())
        .min_by(|&a, &b| (truth[a].0 - t).abs().total_cmp(&(truth[b].0 - t).abs()))
        .filter(|&j| (truth[j].0 - t).abs() <= window)
}

/// Scores one target's predicted track.
///
/// `predicted` holds one entry per frame; `None` marks a frame without a
/// detection. `truth` must be sorted by time. Frames lacking either a
/// prediction or a truth sample within `window` are counted as omitted.
pub fn eval_localization(
    predicted: &[(f64, Option<WorldPoint2D>)],
    truth: &[(f64, WorldPoint2D)],
    camera: WorldPoint2D,
    window: f64,
) -> Result<LocalizationEval, EvalError> {
    let mut err_sum = 0.0;
    let mut cos_sum = 0.0;
    let mut matched = 0;
    let mut omitted = 0;
    for &(t, p) in predicted {
        let (Some(p), Some(j)) = (p, nearest(truth, t, window)) else {
            omitted += 1;
            continue;
        };
        let q = truth[j].1;
        err_sum += p.distance(q);
        cos_sum += cosine(p - camera, q - camera);
        matched += 1;
    }
    if matched == 0 {
        return Err(EvalError::NoMatches);
    }
    Ok(LocalizationEval {
        ape: err_sum / matched as f64,
        cossim: cos_sum / matched as f64,
        matched,
        omitted,
    })
}
