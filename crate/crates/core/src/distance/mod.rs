//! Person-to-camera distance regression from bounding-box features.
//!
//! A small squared-error gradient-boosted tree ensemble, trained from scratch:
//! the base score is the target mean and every round fits one depth-limited
//! tree to the current residuals on a row subsample, with per-tree and
//! per-level column subsampling.

mod io;
mod metrics;
mod search;
mod tree;

pub use io::{read_dataset_csv, read_model, write_dataset_csv, write_model, MODEL_HEADER};
pub use metrics::{evaluate, RegressionMetrics};
pub use search::{random_search_cv, SearchSpace};
pub use tree::{Node, RegressionTree};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use tree::TreeBuilder;

pub const NUM_FEATURES: usize = 4;

#[derive(Debug, Error)]
pub enum GbdtError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("target at row {row} is not a finite non-negative distance: {value}")]
    BadTarget { row: usize, value: f64 },
    #[error("feature at row {row} is outside [0, 1] or not finite")]
    BadFeature { row: usize },
    #[error("invalid hyperparameter {name}: {reason}")]
    BadHyperParam { name: &'static str, reason: String },
    #[error("need at least {k} samples for {k}-fold cross-validation, got {n}")]
    TooFewSamples { n: usize, k: usize },
    #[error("invalid search setup: {0}")]
    BadSearch(String),
    #[error("model file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Normalized box geometry: center and size as fractions of the image side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBoxFeatures {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl BBoxFeatures {
    pub fn as_array(&self) -> [f64; NUM_FEATURES] {
        [self.cx, self.cy, self.w, self.h]
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn is_valid(&self) -> bool {
        self.as_array()
            .iter()
            .all(|v| v.is_finite() && (0.0..=1.0).contains(v))
    }
}

/// One labelled training row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: BBoxFeatures,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbdtHyperParams {
    pub max_depth: usize,
    pub learning_rate: f64,
    pub n_estimators: usize,
    pub colsample_bytree: f64,
    pub colsample_bylevel: f64,
    pub subsample: f64,
}

impl Default for GbdtHyperParams {
    /// The tuned configuration used for the deployed estimator.
    fn default() -> Self {
        Self {
            max_depth: 3,
            learning_rate: 0.05,
            n_estimators: 500,
            colsample_bytree: 0.5,
            colsample_bylevel: 0.8,
            subsample: 0.6,
        }
    }
}

impl GbdtHyperParams {
    /// No row or column subsampling.
    pub fn exact(max_depth: usize, learning_rate: f64, n_estimators: usize) -> Self {
        Self {
            max_depth,
            learning_rate,
            n_estimators,
            colsample_bytree: 1.0,
            colsample_bylevel: 1.0,
            subsample: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), GbdtError> {
        let bad = |name, reason: &str| {
            Err(GbdtError::BadHyperParam {
                name,
                reason: reason.to_string(),
            })
        };
        if self.max_depth < 1 {
            return bad("max_depth", "must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad("learning_rate", "must lie in (0, 1]");
        }
        for (name, v) in [
            ("colsample_bytree", self.colsample_bytree),
            ("colsample_bylevel", self.colsample_bylevel),
            ("subsample", self.subsample),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return bad(name, "fraction must lie in (0, 1]");
            }
        }
        Ok(())
    }
}

/// Trained ensemble. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    pub base_score: f64,
    pub learning_rate: f64,
    pub trees: Vec<RegressionTree>,
}

impl GbdtModel {
    /// Raw ensemble output, not clamped.
    pub fn raw_predict(&self, f: &BBoxFeatures) -> f64 {
        let x = f.as_array();
        let sum: f64 = self.trees.iter().map(|t| t.predict(&x)).sum();
        self.base_score + self.learning_rate * sum
    }

    pub fn predict(&self, f: &BBoxFeatures) -> f64 {
        self.raw_predict(f).max(0.0)
    }
}

pub fn predict(model: &GbdtModel, f: &BBoxFeatures) -> f64 {
    model.predict(f)
}

pub(crate) fn check_dataset(data: &[Sample]) -> Result<(), GbdtError> {
    if data.is_empty() {
        return Err(GbdtError::EmptyDataset);
    }
    for (row, s) in data.iter().enumerate() {
        if !(s.distance.is_finite() && s.distance >= 0.0) {
            return Err(GbdtError::BadTarget {
                row,
                value: s.distance,
            });
        }
        if !s.features.as_array().iter().all(|v| v.is_finite()) {
            return Err(GbdtError::BadFeature { row });
        }
    }
    Ok(())
}

fn sample_count(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64).floor() as usize).clamp(1, n)
}

fn sample_sorted(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    if k == n {
        return (0..n).collect();
    }
    let mut v = index::sample(rng, n, k).into_vec();
    v.sort_unstable();
    v
}

pub fn fit(data: &[Sample], hp: &GbdtHyperParams, seed: u64) -> Result<GbdtModel, GbdtError> {
    check_dataset(data)?;
    hp.validate()?;

    let n = data.len();
    let features: Vec<[f64; NUM_FEATURES]> = data.iter().map(|s| s.features.as_array()).collect();
    let targets: Vec<f64> = data.iter().map(|s| s.distance).collect();
    let base_score = targets.iter().sum::<f64>() / n as f64;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pred = vec![base_score; n];
    let mut residuals = vec![0.0; n];
    let mut trees = Vec::with_capacity(hp.n_estimators);

    let rows_per_tree = sample_count(hp.subsample, n);
    let cols_per_tree = sample_count(hp.colsample_bytree, NUM_FEATURES);

    for _ in 0..hp.n_estimators {
        for i in 0..n {
            residuals[i] = targets[i] - pred[i];
        }
        let mut rows = sample_sorted(&mut rng, n, rows_per_tree);
        let tree_cols = sample_sorted(&mut rng, NUM_FEATURES, cols_per_tree);
        let per_level = sample_count(hp.colsample_bylevel, tree_cols.len());
        let levels: Vec<Vec<usize>> = (0..hp.max_depth)
            .map(|_| {
                sample_sorted(&mut rng, tree_cols.len(), per_level)
                    .into_iter()
                    .map(|k| tree_cols[k])
                    .collect()
            })
            .collect();

        let tree = TreeBuilder {
            features: &features,
            residuals: &residuals,
            max_depth: hp.max_depth,
        }
        .build(&mut rows, &levels);

        for i in 0..n {
            pred[i] += hp.learning_rate * tree.predict(&features[i]);
        }
        trees.push(tree);
    }

    Ok(GbdtModel {
        base_score,
        learning_rate: hp.learning_rate,
        trees,
    })
}
