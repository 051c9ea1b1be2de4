//! Table-driven classifier for contract tests.
//!
//! Posteriors are looked up by the first value of the prefix, which test
//! fixtures use as a series id. One table per monitored timestamp, so a test
//! can script an exact posterior trajectory for each series.

use ndarray::ArrayView1;
use serde::{Deserialize, Serialize};

use super::ProbabilisticClassifier;
use crate::error::{EdmError, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScriptedConfig {
    /// `tables[k]` maps a series id (the first value of the prefix) to the
    /// posterior that timestamp-`k` member returns.
    pub tables: Vec<Vec<(f64, Vec<f64>)>>,
}

impl ScriptedConfig {
    pub(crate) fn at_timestamp(&self, k: usize, n_classes: usize) -> Result<ScriptedClassifier> {
        let table = self.tables.get(k).cloned().ok_or_else(|| {
            EdmError::InvalidParam(format!(
                "scripted config has {} tables, needed index {k}",
                self.tables.len()
            ))
        })?;
        Ok(ScriptedClassifier { table, n_classes })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScriptedClassifier {
    table: Vec<(f64, Vec<f64>)>,
    n_classes: usize,
}

impl ProbabilisticClassifier for ScriptedClassifier {
    fn posterior(&self, prefix: ArrayView1<'_, f64>) -> Vec<f64> {
        let id = prefix[0];
        for (key, posterior) in &self.table {
            if (key - id).abs() < 1e-9 {
                return posterior.clone();
            }
        }
        vec![1.0 / self.n_classes as f64; self.n_classes]
    }
}
