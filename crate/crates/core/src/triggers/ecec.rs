//! Reliability-fusion trigger.
//!
//! Calibration measures, per timestamp and class, how often predicting that
//! class was right (a smoothed precision). At decision time the confidences
//! of all timestamps that agreed with the current prediction are fused as
//! `1 - prod(1 - r_j(c))`; the series halts once the fused confidence clears
//! a threshold picked by grid search.

use serde::{Deserialize, Serialize};

use super::{grid_argmin, mean_cost_unchecked, validate_cube_cost, TriggerModel};
use crate::classifiers::{argmax_class, ProbabilityCube};
use crate::cost::CostMatrices;
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EcecState {
    /// `reliability[k][c] = (#correct_c + 1) / (#predicted_c + 2)` at
    /// timestamp k; the add-one/add-two smoothing keeps it inside (0, 1).
    pub reliability: Vec<Vec<f64>>,
    pub theta: f64,
}

impl EcecState {
    pub(crate) fn fused_confidence(&self, history: &[Vec<f64>]) -> f64 {
        let k = history.len() - 1;
        let current = argmax_class(&history[k]);
        let mut remaining = 1.0;
        for (j, posterior) in history.iter().enumerate() {
            if argmax_class(posterior) == current {
                remaining *= 1.0 - self.reliability[j][current];
            }
        }
        1.0 - remaining
    }
}

impl TriggerModel for EcecState {
    fn should_trigger(&self, history: &[Vec<f64>]) -> bool {
        let k = history.len() - 1;
        if k + 1 >= self.reliability.len() {
            return true;
        }
        self.fused_confidence(history) >= self.theta
    }
}

fn reliabilities(cube: &ProbabilityCube, cost: &CostMatrices) -> Vec<Vec<f64>> {
    let c = cost.n_classes();
    (0..cube.n_timestamps())
        .map(|k| {
            let mut predicted = vec![0usize; c];
            let mut correct = vec![0usize; c];
            for i in 0..cube.n_series() {
                let p = argmax_class(&cube.posterior_vec(i, k));
                predicted[p] += 1;
                if p == cube.labels[i] {
                    correct[p] += 1;
                }
            }
            (0..c)
                .map(|class| (correct[class] + 1) as f64 / (predicted[class] + 2) as f64)
                .collect()
        })
        .collect()
}

/// Estimates per-(timestamp, class) reliabilities and picks `theta` from the
/// grid `{0.00, 0.01, ..., 1.00}`; ties go to the smallest theta.
pub fn fit_ecec(cube: &ProbabilityCube, cost: &CostMatrices) -> Result<EcecState> {
    validate_cube_cost(cube, cost)?;
    let reliability = reliabilities(cube, cost);
    let best = grid_argmin(101, |i| {
        let candidate = EcecState {
            reliability: reliability.clone(),
            theta: i as f64 / 100.0,
        };
        mean_cost_unchecked(&candidate, cube, cost)
    });
    Ok(EcecState {
        reliability,
        theta: best as f64 / 100.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fused_confidence_multiplies_matching_timestamps_only() {
        let state = EcecState {
            reliability: vec![vec![0.6, 0.5], vec![0.5, 0.25], vec![0.5, 0.5]],
            theta: 0.75,
        };
        // Class 0 predicted at both timestamps: conf = 1 - 0.4*0.5 = 0.8.
        let history = vec![vec![0.7, 0.3], vec![0.6, 0.4]];
        assert!((state.fused_confidence(&history) - 0.8).abs() < 1e-12);
        assert!(state.should_trigger(&history));

        let strict = EcecState { theta: 0.9, ..state.clone() };
        assert!(!strict.should_trigger(&history));

        // Prediction flips to class 1 at the last step: only timestamps whose
        // argmax matches class 1 contribute, here just j=1 with r=0.25.
        let flipped = vec![vec![0.7, 0.3], vec![0.4, 0.6]];
        assert!((state.fused_confidence(&flipped) - 0.25).abs() < 1e-12);
    }
}
