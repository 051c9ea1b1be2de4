//! Multinomial logistic regression trained by full-batch gradient descent.
//!
//! Deterministic by construction: weights start at zero, the batch gradient
//! of the L2-regularized cross-entropy is applied for `max_iters` steps at a
//! constant learning rate. Features are standardized with train-set
//! statistics inside the model.

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::ProbabilisticClassifier;
use crate::error::{EdmError, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureMode {
    /// The prefix values themselves.
    RawPrefix,
    /// Six summary statistics of the prefix: mean, population std, min, max,
    /// least-squares slope, lag-1 autocorrelation.
    #[default]
    Summary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticConfig {
    pub features: FeatureMode,
    /// Ridge penalty on non-intercept weights.
    pub l2: f64,
    pub max_iters: usize,
    /// Constant learning rate.
    pub learning_rate: f64,
    /// Reserved; training is deterministic and draws nothing from it.
    pub seed: u64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            features: FeatureMode::Summary,
            l2: 1e-2,
            max_iters: 200,
            learning_rate: 0.1,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LogisticModel {
    features: FeatureMode,
    n_classes: usize,
    feat_mean: Vec<f64>,
    feat_std: Vec<f64>,
    /// `n_classes x (d + 1)`; the last column is the intercept.
    weights: Array2<f64>,
}

pub(crate) fn summary_features(prefix: &[f64]) -> Vec<f64> {
    let n = prefix.len() as f64;
    let mean = prefix.iter().sum::<f64>() / n;
    let var = prefix.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    let min = prefix.iter().copied().fold(f64::INFINITY, f64::min);
    let max = prefix.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    // Least-squares slope against positions 0..len-1.
    let xbar = (prefix.len() as f64 - 1.0) / 2.0;
    let sxx: f64 = (0..prefix.len())
        .map(|i| (i as f64 - xbar) * (i as f64 - xbar))
        .sum();
    let sxy: f64 = prefix
        .iter()
        .enumerate()
        .map(|(i, v)| (i as f64 - xbar) * (v - mean))
        .sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };

    let denom: f64 = prefix.iter().map(|v| (v - mean) * (v - mean)).sum();
    let num: f64 = prefix
        .windows(2)
        .map(|w| (w[0] - mean) * (w[1] - mean))
        .sum();
    let lag1 = if denom > 1e-12 { num / denom } else { 0.0 };

    vec![mean, std, min, max, slope, lag1]
}

impl LogisticModel {
    fn featurize(mode: FeatureMode, prefix: ArrayView1<'_, f64>) -> Vec<f64> {
        match mode {
            FeatureMode::RawPrefix => prefix.to_vec(),
            FeatureMode::Summary => summary_features(prefix.as_slice().unwrap_or(&prefix.to_vec())),
        }
    }

    pub fn fit(
        cfg: LogisticConfig,
        prefixes: ArrayView2<'_, f64>,
        labels: &[usize],
        n_classes: usize,
    ) -> Result<LogisticModel> {
        if prefixes.nrows() == 0 {
            return Err(EdmError::EmptyTrainingSet);
        }
        if cfg.l2 < 0.0 || cfg.max_iters < 1 {
            return Err(EdmError::InvalidParam(
                "logistic config needs l2 >= 0 and max_iters >= 1".to_string(),
            ));
        }
        let mut present = vec![false; n_classes];
        for &y in labels {
            present[y] = true;
        }
        if present.iter().filter(|&&p| p).count() < 2 {
            return Err(EdmError::DegenerateLabels);
        }

        let n = prefixes.nrows();
        let feats: Vec<Vec<f64>> = prefixes
            .rows()
            .into_iter()
            .map(|row| Self::featurize(cfg.features, row))
            .collect();
        if feats.iter().flatten().any(|v| !v.is_finite()) {
            return Err(EdmError::InvalidParam(
                "non-finite feature value".to_string(),
            ));
        }
        let d = feats[0].len();

        let mut feat_mean = vec![0.0; d];
        let mut feat_std = vec![0.0; d];
        for j in 0..d {
            let mean = feats.iter().map(|f| f[j]).sum::<f64>() / n as f64;
            let var = feats.iter().map(|f| (f[j] - mean) * (f[j] - mean)).sum::<f64>() / n as f64;
            feat_mean[j] = mean;
            feat_std[j] = var.sqrt();
        }
        let x: Vec<Vec<f64>> = feats
            .iter()
            .map(|f| standardize(f, &feat_mean, &feat_std))
            .collect();

        let mut weights = Array2::<f64>::zeros((n_classes, d + 1));
        let mut probs = vec![0.0; n_classes];
        let mut grad = Array2::<f64>::zeros((n_classes, d + 1));
        for _ in 0..cfg.max_iters {
            // L2 term first; the intercept column stays unpenalized.
            for c in 0..n_classes {
                for j in 0..d {
                    grad[(c, j)] = cfg.l2 * weights[(c, j)];
                }
                grad[(c, d)] = 0.0;
            }
            for (xi, &yi) in x.iter().zip(labels) {
                softmax_into(&weights, xi, &mut probs);
                for c in 0..n_classes {
                    let delta = (probs[c] - f64::from(u8::from(c == yi))) / n as f64;
                    for (j, &xj) in xi.iter().enumerate() {
                        grad[(c, j)] += delta * xj;
                    }
                    grad[(c, d)] += delta;
                }
            }
            weights.scaled_add(-cfg.learning_rate, &grad);
        }

        Ok(LogisticModel {
            features: cfg.features,
            n_classes,
            feat_mean,
            feat_std,
            weights,
        })
    }

    /// Model with all-zero weights (uniform posteriors); the state gradient
    /// descent starts from.
    #[cfg(test)]
    pub(crate) fn zeroed(features: FeatureMode, n_classes: usize, d: usize) -> LogisticModel {
        LogisticModel {
            features,
            n_classes,
            feat_mean: vec![0.0; d],
            feat_std: vec![1.0; d],
            weights: Array2::zeros((n_classes, d + 1)),
        }
    }
}

fn standardize(f: &[f64], mean: &[f64], std: &[f64]) -> Vec<f64> {
    f.iter()
        .zip(mean.iter().zip(std))
        .map(|(v, (m, s))| if *s < 1e-8 { 0.0 } else { (v - m) / s })
        .collect()
}

fn softmax_into(weights: &Array2<f64>, x: &[f64], out: &mut [f64]) {
    let d = x.len();
    for (c, o) in out.iter_mut().enumerate() {
        let mut z = weights[(c, d)];
        for (j, &xj) in x.iter().enumerate() {
            z += weights[(c, j)] * xj;
        }
        *o = z;
    }
    let zmax = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for o in out.iter_mut() {
        *o = (*o - zmax).exp();
        total += *o;
    }
    for o in out.iter_mut() {
        *o /= total;
    }
}

impl ProbabilisticClassifier for LogisticModel {
    fn posterior(&self, prefix: ArrayView1<'_, f64>) -> Vec<f64> {
        let f = Self::featurize(self.features, prefix);
        let x = standardize(&f, &self.feat_mean, &self.feat_std);
        let mut out = vec![0.0; self.n_classes];
        softmax_into(&self.weights, &x, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::argmax_class;
    use ndarray::Array2;

    #[test]
    fn zero_weights_give_uniform_posteriors() {
        let m = LogisticModel::zeroed(FeatureMode::Summary, 3, 6);
        let p = m.posterior(ndarray::array![1.0, 2.0, 3.0].view());
        for v in &p {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn separable_toy_set_reaches_full_training_accuracy() {
        // Twenty length-1 "series": ten at -1 (class 0), ten at +1 (class 1).
        // Summary features of a singleton reduce to the raw value.
        let mut values = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..10 {
            values.push(-1.0);
            labels.push(0);
            values.push(1.0);
            labels.push(1);
        }
        let x = Array2::from_shape_vec((20, 1), values).unwrap();
        let m = LogisticModel::fit(LogisticConfig::default(), x.view(), &labels, 2).unwrap();
        let correct = x
            .rows()
            .into_iter()
            .zip(&labels)
            .filter(|(row, &y)| argmax_class(&m.posterior(*row)) == y)
            .count();
        assert_eq!(correct, 20);
    }

    #[test]
    fn posteriors_sum_to_one() {
        let x = Array2::from_shape_vec(
            (4, 3),
            vec![0.0, 1.0, 2.0, 2.0, 1.0, 0.0, 0.5, 0.5, 0.5, -1.0, 3.0, 1.0],
        )
        .unwrap();
        let m = LogisticModel::fit(LogisticConfig::default(), x.view(), &[0, 1, 0, 1], 2).unwrap();
        for row in x.rows() {
            let p = m.posterior(row);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(p.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn single_class_is_rejected() {
        let x = Array2::zeros((3, 2));
        assert!(matches!(
            LogisticModel::fit(LogisticConfig::default(), x.view(), &[1, 1, 1], 2),
            Err(EdmError::DegenerateLabels)
        ));
    }

    #[test]
    fn summary_features_hand_values() {
        let f = summary_features(&[1.0, 2.0, 3.0]);
        assert!((f[0] - 2.0).abs() < 1e-12); // mean
        assert!((f[1] - (2.0f64 / 3.0).sqrt()).abs() < 1e-12); // population std
        assert_eq!(f[2], 1.0);
        assert_eq!(f[3], 3.0);
        assert!((f[4] - 1.0).abs() < 1e-12); // slope of a straight line
        // lag-1 autocorr of [1,2,3]: ((1-2)(2-2) + (2-2)(3-2)) / 2 = 0
        assert!(f[5].abs() < 1e-12);
        // Singleton prefix: slope and autocorr fall back to zero.
        let f1 = summary_features(&[4.0]);
        assert_eq!(f1, vec![4.0, 0.0, 4.0, 4.0, 0.0, 0.0]);
    }
}
