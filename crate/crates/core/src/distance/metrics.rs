use serde::{Deserialize, Serialize};

use super::{GbdtError, GbdtModel, Sample};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionMetrics {
    pub mae: f64,
    pub medae: f64,
    pub maxerr: f64,
    pub expvar: f64,
}

impl RegressionMetrics {
    /// Metrics of `predicted` against `truth`, pairwise.
    pub fn from_pairs(predicted: &[f64], truth: &[f64]) -> Result<Self, GbdtError> {
        assert_eq!(predicted.len(), truth.len());
        if truth.is_empty() {
            return Err(GbdtError::EmptyDataset);
        }
        let n = truth.len() as f64;
        let mut abs: Vec<f64> = predicted
            .iter()
            .zip(truth)
            .map(|(p, t)| (p - t).abs())
            .collect();
        let mae = abs.iter().sum::<f64>() / n;
        abs.sort_by(f64::total_cmp);
        let mid = abs.len() / 2;
        let medae = if abs.len() % 2 == 1 {
            abs[mid]
        } else {
            (abs[mid - 1] + abs[mid]) / 2.0
        };
        let maxerr = *abs.last().unwrap();

        let residuals: Vec<f64> = truth.iter().zip(predicted).map(|(t, p)| t - p).collect();
        let var_res = variance(&residuals);
        let var_y = variance(truth);
        let expvar = if var_y > 0.0 {
            1.0 - var_res / var_y
        } else if var_res == 0.0 {
            1.0
        } else {
            0.0
        };
        Ok(Self {
            mae,
            medae,
            maxerr,
            expvar,
        })
    }
}

fn variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n
}

pub fn evaluate(model: &GbdtModel, holdout: &[Sample]) -> Result<RegressionMetrics, GbdtError> {
    let predicted: Vec<f64> = holdout.iter().map(|s| model.predict(&s.features)).collect();
    let truth: Vec<f64> = holdout.iter().map(|s| s.distance).collect();
    RegressionMetrics::from_pairs(&predicted, &truth)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictor() {
        let y = [1.0, 2.0, 4.0];
        let m = RegressionMetrics::from_pairs(&y, &y).unwrap();
        assert_eq!(
            m,
            RegressionMetrics {
                mae: 0.0,
                medae: 0.0,
                maxerr: 0.0,
                expvar: 1.0
            }
        );
    }

    #[test]
    fn constant_predictor_explains_nothing() {
        let y = [1.0, 2.0, 4.0, 5.0];
        let m = RegressionMetrics::from_pairs(&[3.0; 4], &y).unwrap();
        assert!(m.expvar.abs() < 1e-15);
        assert_eq!(m.mae, 1.5);
        assert_eq!(m.medae, 1.5);
        assert_eq!(m.maxerr, 2.0);
    }

    #[test]
    fn hand_computed() {
        // errors 0.5, -1, 0, 2 -> |e| sorted 0, .5, 1, 2
        let truth = [1.0, 2.0, 3.0, 4.0];
        let pred = [1.5, 1.0, 3.0, 6.0];
        let m = RegressionMetrics::from_pairs(&pred, &truth).unwrap();
        assert_eq!(m.mae, 0.875);
        assert_eq!(m.medae, 0.75);
        assert_eq!(m.maxerr, 2.0);
        // residuals t-p = -.5, 1, 0, -2: mean -.375, var = 1.171875; var(y) = 1.25
        assert!((m.expvar - (1.0 - 1.171875 / 1.25)).abs() < 1e-15);
        assert!(m.medae <= m.maxerr && m.expvar <= 1.0);
    }

    #[test]
    fn empty_holdout() {
        let model = GbdtModel {
            base_score: 1.0,
            learning_rate: 0.1,
            trees: vec![],
        };
        assert!(matches!(
            evaluate(&model, &[]),
            Err(GbdtError::EmptyDataset)
        ));
    }
}
