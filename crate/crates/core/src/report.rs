//! Evaluation metrics and canonical report serialization.
//!
//! Three classical metrics: average decision cost, accuracy, and earliness
//! (mean decided-prefix fraction, normalized by `max_T`). Reports serialize
//! to canonical JSON — keys sorted, reals rendered with 17 significant
//! digits — so golden-file comparisons are byte-stable across platforms.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cost::CostMatrices;
use crate::error::{EdmError, Result};
use crate::pipeline::PredictionOutcome;

/// Per-instance decision as persisted in reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub pred: usize,
    #[serde(rename = "true")]
    pub truth: usize,
    /// Decision time `t_k` (prefix length).
    pub t: usize,
    pub forced: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub dataset: String,
    pub trigger: String,
    pub classifier: String,
    pub avg_cost: f64,
    pub accuracy: f64,
    pub earliness: f64,
    pub n_test: usize,
    pub seed: u64,
    pub jobs: usize,
    pub config_digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcomes: Option<Vec<OutcomeRecord>>,
}

impl EvaluationReport {
    /// Canonical JSON; see [`canonical_json`].
    pub fn to_canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        canonical_json(&value)
    }

    pub fn from_json(text: &str) -> Result<EvaluationReport> {
        Ok(serde_json::from_str(text)?)
    }

    /// Drops the per-instance outcome array (for compact reports).
    pub fn without_outcomes(mut self) -> EvaluationReport {
        self.outcomes = None;
        self
    }
}

/// `(avg_cost, accuracy, earliness)` over a set of outcomes.
pub fn compute_metrics(
    outcomes: &[PredictionOutcome],
    labels: &[usize],
    cost: &CostMatrices,
) -> Result<(f64, f64, f64)> {
    if outcomes.is_empty() {
        return Err(EdmError::EmptyInput);
    }
    if outcomes.len() != labels.len() {
        return Err(EdmError::LengthMismatch(format!(
            "{} outcomes vs {} labels",
            outcomes.len(),
            labels.len()
        )));
    }
    let n = outcomes.len() as f64;
    let mut total_cost = 0.0;
    let mut correct = 0usize;
    let mut earliness = 0.0;
    for (o, &y) in outcomes.iter().zip(labels) {
        total_cost += cost.decision_cost(y, o.predicted_class, o.decision_timestamp_index)?;
        correct += usize::from(o.predicted_class == y);
        earliness += o.decision_time as f64 / cost.max_t() as f64;
    }
    Ok((total_cost / n, correct as f64 / n, earliness / n))
}

/// Renders a JSON value canonically: object keys sorted, strings escaped the
/// serde_json way, integers plain, and every non-integer number in scientific
/// notation with 17 significant digits (which round-trips f64 losslessly).
pub fn canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_canonical(value, &mut out);
    out
}

fn write_canonical(value: &Value, out: &mut String) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().expect("f64 number");
                out.push_str(&format!("{x:.16e}"));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string serializes"));
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            // serde_json's default map is a BTreeMap: iteration is sorted.
            out.push('{');
            for (i, (key, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(key).expect("key serializes"));
                out.push(':');
                write_canonical(item, out);
            }
            out.push('}');
        }
    }
}
