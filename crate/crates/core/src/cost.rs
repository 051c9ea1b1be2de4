//! The cost setting: how much a wrong prediction costs compared to waiting.
//!
//! Nothing in this crate trains without a [`CostSpec`]: the misclassification
//! matrix and the delay cost are the ground truth for both fitting and
//! evaluation. [`CostMatrices`] materializes, for every monitored timestamp
//! `t_k`, the table `C_k[y][ŷ] = misclf[y][ŷ] + D(t_k)`.
//!
//! Conventions, enforced everywhere:
//! - the misclassification matrix is indexed `[true][predicted]`;
//! - timestamps are 1-based prefix lengths, strictly increasing, and the last
//!   one equals the full series length `max_T` so a forced decision is always
//!   defined;
//! - the delay cost depends on time only, never on the class.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{EdmError, Result};

/// Delay-cost descriptor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DelayCost {
    /// `D(t) = alpha * t / max_T`; evaluates to exactly `alpha` at `max_T`.
    Linear { alpha: f64 },
    /// One explicit non-negative value per monitored timestamp,
    /// non-decreasing.
    Table { values: Vec<f64> },
}

/// The declarative cost setting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostSpec {
    /// Number of class labels.
    pub n_classes: usize,
    /// Monitored timestamps as 1-based prefix lengths; last equals `max_T`.
    pub timestamps: Vec<usize>,
    /// Misclassification costs indexed `[true][predicted]`, row-major.
    pub misclf: Vec<Vec<f64>>,
    pub delay: DelayCost,
}

impl CostSpec {
    /// Symmetric 0/1 misclassification with a linear delay — the simplest
    /// emulated cost setting when no true costs are known.
    pub fn zero_one_linear(n_classes: usize, timestamps: Vec<usize>, alpha: f64) -> CostSpec {
        let misclf = (0..n_classes)
            .map(|i| {
                (0..n_classes)
                    .map(|j| if i == j { 0.0 } else { 1.0 })
                    .collect()
            })
            .collect();
        CostSpec {
            n_classes,
            timestamps,
            misclf,
            delay: DelayCost::Linear { alpha },
        }
    }

    /// Full series length; the final monitored timestamp.
    pub fn max_t(&self) -> usize {
        self.timestamps.last().copied().unwrap_or(0)
    }

    pub fn n_timestamps(&self) -> usize {
        self.timestamps.len()
    }

    /// Delay cost at timestamp index `k`.
    pub fn delay_at(&self, k: usize) -> f64 {
        match &self.delay {
            DelayCost::Linear { alpha } => {
                alpha * (self.timestamps[k] as f64 / self.max_t() as f64)
            }
            DelayCost::Table { values } => values[k],
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("cost spec serializes")
    }

    pub fn from_json(text: &str) -> Result<CostSpec> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Checks every `CostSpec` invariant and reports all violations, not just
/// the first.
pub fn validate_spec(spec: &CostSpec) -> Vec<String> {
    let mut violations = Vec::new();
    if spec.n_classes == 0 {
        violations.push("n_classes must be positive".to_string());
    }
    if spec.timestamps.is_empty() {
        violations.push("timestamps empty".to_string());
    } else {
        if spec.timestamps[0] < 1 {
            violations.push("timestamps must be 1-based prefix lengths".to_string());
        }
        if spec.timestamps.windows(2).any(|w| w[0] >= w[1]) {
            violations.push("timestamps not strictly increasing".to_string());
        }
    }
    if spec.misclf.len() != spec.n_classes
        || spec.misclf.iter().any(|row| row.len() != spec.n_classes)
    {
        violations.push(format!(
            "misclf must be a {0}x{0} matrix",
            spec.n_classes
        ));
    }
    for row in &spec.misclf {
        for &c in row {
            if !c.is_finite() {
                violations.push("non-finite misclassification cost".to_string());
            } else if c < 0.0 {
                violations.push("negative misclassification cost".to_string());
            }
        }
    }
    match &spec.delay {
        DelayCost::Linear { alpha } => {
            if !alpha.is_finite() || *alpha < 0.0 {
                violations.push("linear delay alpha must be a non-negative real".to_string());
            }
        }
        DelayCost::Table { values } => {
            if values.len() != spec.timestamps.len() {
                violations.push(format!(
                    "delay table has {} values for {} timestamps",
                    values.len(),
                    spec.timestamps.len()
                ));
            }
            if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                violations.push("negative delay cost".to_string());
            }
            if values.windows(2).any(|w| w[0] > w[1]) {
                violations.push("delay table not non-decreasing".to_string());
            }
        }
    }
    // Dedup repeated per-entry messages.
    violations.dedup();
    violations
}

/// Per-timestamp decision-cost tables `C_k = misclf + D(t_k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostMatrices {
    spec: CostSpec,
    tables: Vec<Array2<f64>>,
}

/// Validates `spec` and materializes the per-timestamp tables.
pub fn build_cost_matrices(spec: CostSpec) -> Result<CostMatrices> {
    let violations = validate_spec(&spec);
    if !violations.is_empty() {
        return Err(EdmError::InvalidSpec(violations.join("; ")));
    }
    let c = spec.n_classes;
    let tables = (0..spec.n_timestamps())
        .map(|k| {
            let d = spec.delay_at(k);
            Array2::from_shape_fn((c, c), |(y, yhat)| spec.misclf[y][yhat] + d)
        })
        .collect();
    Ok(CostMatrices { spec, tables })
}

impl CostMatrices {
    pub fn spec(&self) -> &CostSpec {
        &self.spec
    }

    pub fn n_classes(&self) -> usize {
        self.spec.n_classes
    }

    pub fn n_timestamps(&self) -> usize {
        self.spec.n_timestamps()
    }

    pub fn timestamps(&self) -> &[usize] {
        &self.spec.timestamps
    }

    pub fn max_t(&self) -> usize {
        self.spec.max_t()
    }

    pub fn delay_at(&self, k: usize) -> f64 {
        self.spec.delay_at(k)
    }

    /// Misclassification-only part, `misclf[y][ŷ]`.
    pub fn misclf(&self, y_true: usize, y_pred: usize) -> f64 {
        self.spec.misclf[y_true][y_pred]
    }

    pub fn table(&self, k: usize) -> &Array2<f64> {
        &self.tables[k]
    }

    /// `C_k[y_true][y_pred]`, the cost of predicting `y_pred` at timestamp
    /// index `k` when the truth is `y_true`.
    pub fn decision_cost(&self, y_true: usize, y_pred: usize, k: usize) -> Result<f64> {
        let c = self.spec.n_classes;
        if k >= self.tables.len() {
            return Err(EdmError::IndexOutOfRange(format!(
                "timestamp index {k} >= {}",
                self.tables.len()
            )));
        }
        if y_true >= c || y_pred >= c {
            return Err(EdmError::IndexOutOfRange(format!(
                "class index ({y_true},{y_pred}) outside {c} classes"
            )));
        }
        Ok(self.tables[k][(y_true, y_pred)])
    }
}
