//! Per-timestamp probabilistic classification of truncated series.
//!
//! A [`ClassifiersCollection`] holds one fitted classifier per monitored
//! timestamp, each trained only on prefixes of that length. Trigger models
//! are calibrated on out-of-fold posteriors ([`out_of_fold_cube`]) so their
//! confidence estimates are not optimistically biased; the collection itself
//! is then refit on the full training set.

mod knn;
mod logistic;
mod scripted;

pub use knn::{KnnClassifier, KnnConfig, Weighting};
pub use logistic::{FeatureMode, LogisticConfig, LogisticModel};
pub use scripted::{ScriptedClassifier, ScriptedConfig};

use ndarray::{Array2, Array3, ArrayView1, ArrayView2, Axis, s};
use serde::{Deserialize, Serialize};

use crate::blob;
use crate::dataset::{stratified_kfold, TimeSeriesDataset};
use crate::error::{EdmError, Result};
use crate::exec;

/// Behavior contract: anything that yields a posterior over classes for a
/// prefix row can back a collection.
pub trait ProbabilisticClassifier {
    /// Posterior probabilities over `n_classes`, non-negative, summing to 1.
    fn posterior(&self, prefix: ArrayView1<'_, f64>) -> Vec<f64>;
}

/// Index of the largest probability; ties break toward the lowest class
/// index, everywhere in the crate.
pub fn argmax_class(posterior: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in posterior.iter().enumerate().skip(1) {
        if p > posterior[best] {
            best = i;
        }
    }
    best
}

/// Configuration for the classifier cloned at every timestamp.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BaseConfig {
    Knn(KnnConfig),
    Logistic(LogisticConfig),
    /// Table-driven posteriors keyed by a series' first value; only useful
    /// for contract tests and debugging.
    Scripted(ScriptedConfig),
}

impl BaseConfig {
    pub fn name(&self) -> &'static str {
        match self {
            BaseConfig::Knn(_) => "knn",
            BaseConfig::Logistic(_) => "logistic",
            BaseConfig::Scripted(_) => "scripted",
        }
    }

    fn fit_at(
        &self,
        prefixes: ArrayView2<'_, f64>,
        labels: &[usize],
        n_classes: usize,
        timestamp_index: usize,
    ) -> Result<FittedClassifier> {
        match self {
            BaseConfig::Knn(cfg) => {
                KnnClassifier::fit(cfg.clone(), prefixes, labels, n_classes)
                    .map(FittedClassifier::Knn)
            }
            BaseConfig::Logistic(cfg) => {
                LogisticModel::fit(cfg.clone(), prefixes, labels, n_classes)
                    .map(FittedClassifier::Logistic)
            }
            BaseConfig::Scripted(cfg) => cfg
                .at_timestamp(timestamp_index, n_classes)
                .map(FittedClassifier::Scripted),
        }
    }
}

/// A fitted member of a collection.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FittedClassifier {
    Knn(KnnClassifier),
    Logistic(LogisticModel),
    Scripted(ScriptedClassifier),
}

impl ProbabilisticClassifier for FittedClassifier {
    fn posterior(&self, prefix: ArrayView1<'_, f64>) -> Vec<f64> {
        match self {
            FittedClassifier::Knn(m) => m.posterior(prefix),
            FittedClassifier::Logistic(m) => m.posterior(prefix),
            FittedClassifier::Scripted(m) => m.posterior(prefix),
        }
    }
}

/// One fitted probabilistic classifier per monitored timestamp.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassifiersCollection {
    pub timestamps: Vec<usize>,
    pub members: Vec<FittedClassifier>,
    pub base_config: BaseConfig,
    pub n_classes: usize,
}

impl ClassifiersCollection {
    /// Fits one member per timestamp, member `k` seeing only the first
    /// `t_k` columns. Members are independent, so training runs in parallel;
    /// the result does not depend on the schedule.
    pub fn fit(
        ds: &TimeSeriesDataset,
        timestamps: &[usize],
        base_config: &BaseConfig,
    ) -> Result<ClassifiersCollection> {
        validate_timestamps(timestamps, ds.len())?;
        let n_classes = ds.n_classes();
        let members: Vec<Result<FittedClassifier>> = exec::map_indices(timestamps.len(), |k| {
            let t = timestamps[k];
            base_config
                .fit_at(ds.values.slice(s![.., ..t]), &ds.labels, n_classes, k)
                .map_err(|e| e.at_timestamp(t))
        });
        let members = members.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(ClassifiersCollection {
            timestamps: timestamps.to_vec(),
            members,
            base_config: base_config.clone(),
            n_classes,
        })
    }

    pub fn n_timestamps(&self) -> usize {
        self.timestamps.len()
    }

    /// Posteriors of member `k` for every row, truncated to the first `t_k`
    /// columns. Rows shorter than `t_k` are rejected.
    pub fn predict_proba_at(
        &self,
        values: ArrayView2<'_, f64>,
        k: usize,
    ) -> Result<Array2<f64>> {
        let t = *self.timestamps.get(k).ok_or_else(|| {
            EdmError::IndexOutOfRange(format!("timestamp index {k} >= {}", self.timestamps.len()))
        })?;
        if values.ncols() < t {
            return Err(EdmError::PrefixTooShort {
                got: values.ncols(),
                needed: t,
            });
        }
        let member = &self.members[k];
        let mut out = Array2::zeros((values.nrows(), self.n_classes));
        for (i, row) in values.rows().into_iter().enumerate() {
            let p = member.posterior(row.slice(s![..t]));
            for (c, v) in p.into_iter().enumerate() {
                out[(i, c)] = v;
            }
        }
        Ok(out)
    }

    /// Fraction of rows whose argmax posterior at timestamp `k` equals the
    /// true label.
    pub fn score_at(&self, ds: &TimeSeriesDataset, k: usize) -> Result<f64> {
        let probs = self.predict_proba_at(ds.values.view(), k)?;
        let correct = probs
            .rows()
            .into_iter()
            .zip(&ds.labels)
            .filter(|(row, &y)| argmax_class(row.as_slice().unwrap()) == y)
            .count();
        Ok(correct as f64 / ds.n_series() as f64)
    }

    /// Serializes to a versioned binary blob (magic `EDMC1`).
    pub fn to_blob(&self) -> Vec<u8> {
        let payload = serde_json::to_vec(self).expect("collection serializes");
        blob::encode(blob::COLLECTION_MAGIC, &payload)
    }

    pub fn from_blob(bytes: &[u8]) -> Result<ClassifiersCollection> {
        let payload = blob::decode(blob::COLLECTION_MAGIC, bytes)?;
        Ok(serde_json::from_slice(payload)?)
    }
}

fn validate_timestamps(timestamps: &[usize], len: usize) -> Result<()> {
    if timestamps.is_empty() {
        return Err(EdmError::InvalidParam("no timestamps".to_string()));
    }
    if timestamps[0] < 1 || timestamps.last().copied().unwrap() > len {
        return Err(EdmError::InvalidParam(format!(
            "timestamps must lie in [1, {len}]"
        )));
    }
    if timestamps.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EdmError::InvalidParam(
            "timestamps not strictly increasing".to_string(),
        ));
    }
    Ok(())
}

/// Where a calibration cube's posteriors came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Every posterior was produced by a model that never saw that series.
    OutOfFold,
    /// Posteriors of the training series under the full-data fit; optimistic
    /// for confident classifiers, useful only for diagnostics.
    Resubstitution,
}

/// Calibration posteriors, shape `(series, timestamps, classes)`, the input
/// trigger models learn from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityCube {
    pub values: Array3<f64>,
    pub labels: Vec<usize>,
    pub provenance: Provenance,
}

impl ProbabilityCube {
    pub fn n_series(&self) -> usize {
        self.values.len_of(Axis(0))
    }

    pub fn n_timestamps(&self) -> usize {
        self.values.len_of(Axis(1))
    }

    pub fn n_classes(&self) -> usize {
        self.values.len_of(Axis(2))
    }

    pub fn posterior(&self, series: usize, k: usize) -> ArrayView1<'_, f64> {
        self.values.slice(s![series, k, ..])
    }

    pub fn posterior_vec(&self, series: usize, k: usize) -> Vec<f64> {
        self.posterior(series, k).to_vec()
    }
}

/// Builds the calibration cube from a stratified k-fold split: classifiers
/// trained on each fold's complement predict the fold, so no posterior comes
/// from a model that saw its series.
pub fn out_of_fold_cube(
    ds: &TimeSeriesDataset,
    timestamps: &[usize],
    base_config: &BaseConfig,
    folds: usize,
    seed: u64,
) -> Result<ProbabilityCube> {
    validate_timestamps(timestamps, ds.len())?;
    let fold_sets = stratified_kfold(&ds.labels, folds, seed)?;
    let all: Vec<usize> = (0..ds.n_series()).collect();

    let per_fold: Vec<Result<(Vec<usize>, Vec<Array2<f64>>)>> =
        exec::map_indices(fold_sets.len(), |f| {
            let held_out = &fold_sets[f];
            let train_idx: Vec<usize> = all
                .iter()
                .copied()
                .filter(|i| !held_out.contains(i))
                .collect();
            let sub = TimeSeriesDataset {
                name: ds.name.clone(),
                values: ds.values.select(Axis(0), &train_idx),
                labels: train_idx.iter().map(|&i| ds.labels[i]).collect(),
                label_map: ds.label_map.clone(),
            };
            let coll = ClassifiersCollection::fit(&sub, timestamps, base_config)?;
            let held_values = ds.values.select(Axis(0), held_out);
            let preds = (0..timestamps.len())
                .map(|k| coll.predict_proba_at(held_values.view(), k))
                .collect::<Result<Vec<_>>>()?;
            Ok((held_out.clone(), preds))
        });

    let mut values = Array3::zeros((ds.n_series(), timestamps.len(), ds.n_classes()));
    for entry in per_fold {
        let (held_out, preds) = entry?;
        for (k, pred) in preds.iter().enumerate() {
            for (pos, &i) in held_out.iter().enumerate() {
                for c in 0..ds.n_classes() {
                    values[(i, k, c)] = pred[(pos, c)];
                }
            }
        }
    }
    Ok(ProbabilityCube {
        values,
        labels: ds.labels.clone(),
        provenance: Provenance::OutOfFold,
    })
}

/// Posteriors of the training data under a full-data fit; marked
/// [`Provenance::Resubstitution`].
pub fn resubstitution_cube(
    ds: &TimeSeriesDataset,
    timestamps: &[usize],
    base_config: &BaseConfig,
) -> Result<ProbabilityCube> {
    let coll = ClassifiersCollection::fit(ds, timestamps, base_config)?;
    cube_from_collection(&coll, ds, Provenance::Resubstitution)
}

/// Evaluates an already-fitted collection over a dataset into a cube.
pub fn cube_from_collection(
    coll: &ClassifiersCollection,
    ds: &TimeSeriesDataset,
    provenance: Provenance,
) -> Result<ProbabilityCube> {
    let m = coll.n_timestamps();
    let mut values = Array3::zeros((ds.n_series(), m, coll.n_classes));
    for k in 0..m {
        let pred = coll.predict_proba_at(ds.values.view(), k)?;
        for i in 0..ds.n_series() {
            for c in 0..coll.n_classes {
                values[(i, k, c)] = pred[(i, c)];
            }
        }
    }
    Ok(ProbabilityCube {
        values,
        labels: ds.labels.clone(),
        provenance,
    })
}
