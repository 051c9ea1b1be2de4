//! k-nearest-neighbor posterior estimates.
//!
//! Distances are plain Euclidean between prefix rows, mirroring how the
//! collection slices raw value matrices; z-normalization of the series is the
//! dataset loader's job (on by default in the harness). Posteriors are vote
//! fractions among the k nearest — deliberately coarse — or inverse-distance
//! weights for smoother confidences.

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::ProbabilisticClassifier;
use crate::error::{EdmError, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    #[default]
    Uniform,
    /// Weights `1 / (d + 1e-9)`, normalized.
    InverseDistance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnConfig {
    pub k: usize,
    pub weighting: Weighting,
}

impl Default for KnnConfig {
    fn default() -> Self {
        KnnConfig {
            k: 5,
            weighting: Weighting::Uniform,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KnnClassifier {
    cfg: KnnConfig,
    n_classes: usize,
    train: Array2<f64>,
    labels: Vec<usize>,
}

impl KnnClassifier {
    pub fn fit(
        cfg: KnnConfig,
        prefixes: ArrayView2<'_, f64>,
        labels: &[usize],
        n_classes: usize,
    ) -> Result<KnnClassifier> {
        if prefixes.nrows() == 0 {
            return Err(EdmError::EmptyTrainingSet);
        }
        if cfg.k < 1 || cfg.k > prefixes.nrows() {
            return Err(EdmError::InvalidParam(format!(
                "k must lie in [1, {}], got {}",
                prefixes.nrows(),
                cfg.k
            )));
        }
        Ok(KnnClassifier {
            cfg,
            n_classes,
            train: prefixes.to_owned(),
            labels: labels.to_vec(),
        })
    }
}

impl ProbabilisticClassifier for KnnClassifier {
    fn posterior(&self, prefix: ArrayView1<'_, f64>) -> Vec<f64> {
        debug_assert_eq!(prefix.len(), self.train.ncols());
        let dists: Vec<f64> = self
            .train
            .rows()
            .into_iter()
            .map(|row| {
                row.iter()
                    .zip(prefix.iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        // Equal distances break toward the lower training index.
        let mut order: Vec<usize> = (0..dists.len()).collect();
        order.sort_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(a.cmp(&b)));

        let mut acc = vec![0.0; self.n_classes];
        match self.cfg.weighting {
            Weighting::Uniform => {
                for &i in order.iter().take(self.cfg.k) {
                    acc[self.labels[i]] += 1.0;
                }
            }
            Weighting::InverseDistance => {
                for &i in order.iter().take(self.cfg.k) {
                    acc[self.labels[i]] += 1.0 / (dists[i] + 1e-9);
                }
            }
        }
        let total: f64 = acc.iter().sum();
        acc.iter_mut().for_each(|v| *v /= total);
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn uniform_votes_are_fractions() {
        // k = 3 over three rows: the whole set votes {0, 0, 1}.
        let x = array![[0.0, 2.0], [1.0, 3.0], [5.0, 1.0]];
        let y = [0, 0, 1];
        let m = KnnClassifier::fit(KnnConfig { k: 3, weighting: Weighting::Uniform }, x.view(), &y, 2).unwrap();
        let p = m.posterior(array![2.0, 4.0].view());
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((p[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn exact_match_with_k1_is_one_hot() {
        let x = array![[0.0, 1.0, 2.0], [2.0, 1.0, 0.0]];
        let y = [1, 0];
        let m = KnnClassifier::fit(KnnConfig { k: 1, weighting: Weighting::Uniform }, x.view(), &y, 2).unwrap();
        let p = m.posterior(array![0.0, 1.0, 2.0].view());
        assert_eq!(p, vec![0.0, 1.0]);
    }

    #[test]
    fn inverse_distance_weights() {
        // Distances 1 and 3 to classes 0 and 1: weights 1/(1+1e-9) and
        // 1/(3+1e-9), normalized to (0.75, 0.25).
        let x = array![[0.0], [4.0]];
        let y = [0, 1];
        let m = KnnClassifier::fit(
            KnnConfig { k: 2, weighting: Weighting::InverseDistance },
            x.view(),
            &y,
            2,
        )
        .unwrap();
        let p = m.posterior(array![1.0].view());
        assert!((p[0] - 0.75).abs() < 1e-8);
        assert!((p[1] - 0.25).abs() < 1e-8);
        assert!((p[0] + p[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distance_ties_break_by_training_index() {
        // Two identical training rows with different labels; k = 1 must pick
        // the lower index.
        let x = array![[0.0, 1.0], [0.0, 1.0]];
        let y = [1, 0];
        let m = KnnClassifier::fit(KnnConfig { k: 1, weighting: Weighting::Uniform }, x.view(), &y, 2).unwrap();
        let p = m.posterior(array![0.0, 1.0].view());
        assert_eq!(p, vec![0.0, 1.0]);
    }

    #[test]
    fn fit_rejects_bad_k_and_empty_data() {
        let x = array![[0.0, 1.0]];
        assert!(KnnClassifier::fit(KnnConfig { k: 2, weighting: Weighting::Uniform }, x.view(), &[0], 2).is_err());
        assert!(KnnClassifier::fit(KnnConfig { k: 0, weighting: Weighting::Uniform }, x.view(), &[0], 2).is_err());
        let empty = Array2::<f64>::zeros((0, 2));
        assert!(matches!(
            KnnClassifier::fit(KnnConfig::default(), empty.view(), &[], 2),
            Err(EdmError::EmptyTrainingSet)
        ));
    }
}
