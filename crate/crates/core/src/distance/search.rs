use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_dataset, evaluate, fit, GbdtError, GbdtHyperParams, Sample};

/// Discrete candidate values for each hyperparameter; trials draw one from each list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub max_depth: Vec<usize>,
    pub learning_rate: Vec<f64>,
    pub n_estimators: Vec<usize>,
    pub colsample_bytree: Vec<f64>,
    pub colsample_bylevel: Vec<f64>,
    pub subsample: Vec<f64>,
}

impl SearchSpace {
    pub fn single(hp: GbdtHyperParams) -> Self {
        Self {
            max_depth: vec![hp.max_depth],
            learning_rate: vec![hp.learning_rate],
            n_estimators: vec![hp.n_estimators],
            colsample_bytree: vec![hp.colsample_bytree],
            colsample_bylevel: vec![hp.colsample_bylevel],
            subsample: vec![hp.subsample],
        }
    }

    fn is_empty(&self) -> bool {
        self.max_depth.is_empty()
            || self.learning_rate.is_empty()
            || self.n_estimators.is_empty()
            || self.colsample_bytree.is_empty()
            || self.colsample_bylevel.is_empty()
            || self.subsample.is_empty()
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> GbdtHyperParams {
        fn pick<T: Copy>(rng: &mut ChaCha8Rng, v: &[T]) -> T {
            v[rng.random_range(0..v.len())]
        }
        GbdtHyperParams {
            max_depth: pick(rng, &self.max_depth),
            learning_rate: pick(rng, &self.learning_rate),
            n_estimators: pick(rng, &self.n_estimators),
            colsample_bytree: pick(rng, &self.colsample_bytree),
            colsample_bylevel: pick(rng, &self.colsample_bylevel),
            subsample: pick(rng, &self.subsample),
        }
    }
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            max_depth: vec![2, 3, 4, 5, 6],
            learning_rate: vec![0.01, 0.05, 0.1, 0.2, 0.3],
            n_estimators: vec![100, 200, 300, 500],
            colsample_bytree: vec![0.5, 0.75, 1.0],
            colsample_bylevel: vec![0.5, 0.8, 1.0],
            subsample: vec![0.6, 0.8, 1.0],
        }
    }
}

/// Mean absolute error over `k` folds of `data` (folds from a seeded shuffle).
pub fn cross_val_mae(
    data: &[Sample],
    hp: &GbdtHyperParams,
    k_folds: usize,
    seed: u64,
) -> Result<f64, GbdtError> {
    check_dataset(data)?;
    if k_folds < 2 {
        return Err(GbdtError::BadSearch(format!(
            "k_folds must be >= 2, got {k_folds}"
        )));
    }
    if data.len() < k_folds {
        return Err(GbdtError::TooFewSamples {
            n: data.len(),
            k: k_folds,
        });
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let n = data.len();
    let mut total = 0.0;
    for fold in 0..k_folds {
        let lo = fold * n / k_folds;
        let hi = (fold + 1) * n / k_folds;
        let holdout: Vec<Sample> = order[lo..hi].iter().map(|&i| data[i]).collect();
        let train: Vec<Sample> = order[..lo]
            .iter()
            .chain(&order[hi..])
            .map(|&i| data[i])
            .collect();
        let model = fit(&train, hp, seed.wrapping_add(fold as u64))?;
        total += evaluate(&model, &holdout)?.mae;
    }
    Ok(total / k_folds as f64)
}

/// Randomized hyperparameter search; returns the trial with the lowest
/// cross-validated MAE (earliest trial wins ties).
pub fn random_search_cv(
    data: &[Sample],
    space: &SearchSpace,
    k_folds: usize,
    n_trials: usize,
    seed: u64,
) -> Result<GbdtHyperParams, GbdtError> {
    if n_trials < 1 {
        return Err(GbdtError::BadSearch("n_trials must be >= 1".into()));
    }
    if space.is_empty() {
        return Err(GbdtError::BadSearch(
            "every search dimension needs a candidate".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, GbdtHyperParams)> = None;
    for _ in 0..n_trials {
        let hp = space.draw(&mut rng);
        hp.validate()?;
        let score = cross_val_mae(data, &hp, k_folds, seed)?;
        if best.is_none_or(|(s, _)| score < s) {
            best = Some((score, hp));
        }
    }
    Ok(best.expect("at least one trial").1)
}
