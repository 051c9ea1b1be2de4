//! The end-to-end early classifier: a collection of per-timestamp
//! classifiers, a calibrated trigger, and the cost setting, evaluated by
//! gradually unveiling test series at the monitored timestamps.

use ndarray::ArrayView1;
use serde::{Deserialize, Serialize};

use crate::blob;
use crate::classifiers::{
    argmax_class, out_of_fold_cube, BaseConfig, ClassifiersCollection, ProbabilisticClassifier,
    ProbabilityCube,
};
use crate::cost::{build_cost_matrices, CostMatrices, CostSpec};
use crate::dataset::TimeSeriesDataset;
use crate::error::{EdmError, Result};
use crate::exec;
use crate::report::{compute_metrics, EvaluationReport, OutcomeRecord};
use crate::triggers::{Trigger, TriggerConfig, TriggerModel};

/// Where and what a single early classification decided.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionOutcome {
    pub predicted_class: usize,
    /// Index into the monitored timestamps.
    pub decision_timestamp_index: usize,
    /// The prefix length `t_k` at the decision.
    pub decision_time: usize,
    pub posterior_at_decision: Vec<f64>,
    /// True when the decision only happened because the series ran out.
    pub forced: bool,
}

#[derive(Clone, Debug)]
pub struct EarlyClassifierPipeline {
    pub collection: ClassifiersCollection,
    pub trigger: Trigger,
    pub cost: CostMatrices,
}

/// Fits the full pipeline: out-of-fold calibration cube, trigger calibration
/// against the cost setting, then a refit of the collection on all training
/// data.
pub fn fit_pipeline(
    train: &TimeSeriesDataset,
    cost: &CostMatrices,
    base_config: &BaseConfig,
    trigger_config: &TriggerConfig,
    folds: usize,
    seed: u64,
) -> Result<EarlyClassifierPipeline> {
    if train.len() != cost.max_t() {
        return Err(EdmError::TimestampMismatch(format!(
            "training series have length {}, cost setting expects max_T = {}",
            train.len(),
            cost.max_t()
        )));
    }
    let cube = out_of_fold_cube(train, cost.timestamps(), base_config, folds, seed)?;
    let trigger = Trigger::fit(trigger_config, &cube, cost)?;
    let collection = ClassifiersCollection::fit(train, cost.timestamps(), base_config)?;
    Ok(EarlyClassifierPipeline {
        collection,
        trigger,
        cost: cost.clone(),
    })
}

/// Assembles a pipeline from an already-fitted collection. The calibration
/// cube must be supplied by the caller; there is no training data here to
/// derive one from.
pub fn fit_pipeline_prefit(
    collection: ClassifiersCollection,
    cube: Option<&ProbabilityCube>,
    cost: &CostMatrices,
    trigger_config: &TriggerConfig,
) -> Result<EarlyClassifierPipeline> {
    if collection.timestamps != cost.timestamps() {
        return Err(EdmError::TimestampMismatch(
            "collection and cost matrices monitor different timestamps".to_string(),
        ));
    }
    let cube = cube.ok_or(EdmError::MissingCalibrationCube)?;
    let trigger = Trigger::fit(trigger_config, cube, cost)?;
    Ok(EarlyClassifierPipeline {
        collection,
        trigger,
        cost: cost.clone(),
    })
}

impl EarlyClassifierPipeline {
    pub fn n_timestamps(&self) -> usize {
        self.cost.n_timestamps()
    }

    /// Walks the monitored timestamps in order, asking the trigger after each
    /// new posterior. Posteriors are computed per prefix, so nothing beyond
    /// `t_k` is ever read before deciding at `k`.
    pub fn predict_early(&self, series: ArrayView1<'_, f64>) -> Result<PredictionOutcome> {
        if series.len() != self.cost.max_t() {
            return Err(EdmError::LengthMismatch(format!(
                "series length {} != max_T {}",
                series.len(),
                self.cost.max_t()
            )));
        }
        let m = self.n_timestamps();
        let mut history: Vec<Vec<f64>> = Vec::with_capacity(m);
        for k in 0..m {
            let t = self.cost.timestamps()[k];
            let posterior = self.collection.members[k].posterior(series.slice(ndarray::s![..t]));
            history.push(posterior);
            if k + 1 == m || self.trigger.should_trigger(&history) {
                return Ok(PredictionOutcome {
                    predicted_class: argmax_class(&history[k]),
                    decision_timestamp_index: k,
                    decision_time: t,
                    posterior_at_decision: history[k].clone(),
                    forced: k + 1 == m,
                });
            }
        }
        unreachable!("final timestamp always decides")
    }

    /// Scores a test set online: one early prediction per series, metrics
    /// delegated to the report module, outcomes kept in input order.
    pub fn score(&self, test: &TimeSeriesDataset) -> Result<EvaluationReport> {
        if test.len() != self.cost.max_t() {
            return Err(EdmError::LengthMismatch(format!(
                "test series length {} != max_T {}",
                test.len(),
                self.cost.max_t()
            )));
        }
        if test.is_empty() {
            return Err(EdmError::EmptyInput);
        }
        let outcomes: Vec<Result<PredictionOutcome>> =
            exec::map_indices(test.n_series(), |i| self.predict_early(test.series(i)));
        let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
        let (avg_cost, accuracy, earliness) =
            compute_metrics(&outcomes, &test.labels, &self.cost)?;
        let records = outcomes
            .iter()
            .zip(&test.labels)
            .map(|(o, &y)| OutcomeRecord {
                pred: o.predicted_class,
                truth: y,
                t: o.decision_time,
                forced: o.forced,
            })
            .collect();
        Ok(EvaluationReport {
            dataset: test.name.clone(),
            trigger: self.trigger.name().to_string(),
            classifier: self.collection.base_config.name().to_string(),
            avg_cost,
            accuracy,
            earliness,
            n_test: test.n_series(),
            seed: 0,
            jobs: 1,
            config_digest: String::new(),
            outcomes: Some(records),
        })
    }

    /// Serializes the whole pipeline into a versioned blob (magic `EDMP1`)
    /// embedding the collection, the trigger state, and the cost spec.
    pub fn to_blob(&self) -> Vec<u8> {
        let parts = PipelineBlob {
            collection: self.collection.clone(),
            trigger: self.trigger.clone(),
            cost_spec: self.cost.spec().clone(),
        };
        let payload = serde_json::to_vec(&parts).expect("pipeline serializes");
        blob::encode(blob::PIPELINE_MAGIC, &payload)
    }

    pub fn from_blob(bytes: &[u8]) -> Result<EarlyClassifierPipeline> {
        let payload = blob::decode(blob::PIPELINE_MAGIC, bytes)?;
        let parts: PipelineBlob = serde_json::from_slice(payload)?;
        let cost = build_cost_matrices(parts.cost_spec)?;
        if parts.collection.timestamps != cost.timestamps() {
            return Err(EdmError::Blob(
                "collection and cost spec disagree on timestamps".to_string(),
            ));
        }
        Ok(EarlyClassifierPipeline {
            collection: parts.collection,
            trigger: parts.trigger,
            cost,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct PipelineBlob {
    collection: ClassifiersCollection,
    trigger: Trigger,
    cost_spec: CostSpec,
}
