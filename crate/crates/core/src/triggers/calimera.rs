//! Learned halting regressor.
//!
//! Works backward over the calibration cube: at the final timestamp the cost
//! of a series is the cost of deciding there; at every earlier timestamp a
//! ridge regressor (closed-form normal equations, unpenalized intercept) is
//! fit to predict `best-future-cost - cost-of-deciding-now` from the
//! posterior features. A non-negative prediction means waiting cannot beat
//! deciding now, so the policy halts.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::stopping_rule::time_fractions;
use super::{top_two, validate_cube_cost, TriggerModel};
use crate::classifiers::{argmax_class, ProbabilityCube};
use crate::cost::CostMatrices;
use crate::error::{EdmError, Result};
use crate::linalg;

/// One per-timestamp linear predictor; the last weight is the intercept.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RidgeStep {
    pub weights: Vec<f64>,
}

impl RidgeStep {
    fn predict(&self, features: &[f64]) -> f64 {
        let (w, intercept) = self.weights.split_at(self.weights.len() - 1);
        w.iter().zip(features).map(|(a, b)| a * b).sum::<f64>() + intercept[0]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalimeraState {
    /// Regressor for every non-final timestamp index `0..m-1`.
    pub regressors: Vec<RidgeStep>,
    pub time_fractions: Vec<f64>,
    pub lambda: f64,
}

/// Features at timestamp k: posterior vector, top-two margin, elapsed-time
/// fraction.
fn features(posterior: &[f64], time_fraction: f64) -> Vec<f64> {
    let (p1, p2) = top_two(posterior);
    let mut f = posterior.to_vec();
    f.push(p1 - p2);
    f.push(time_fraction);
    f
}

impl TriggerModel for CalimeraState {
    fn should_trigger(&self, history: &[Vec<f64>]) -> bool {
        let k = history.len() - 1;
        if k + 1 >= self.time_fractions.len() {
            return true;
        }
        let f = features(&history[k], self.time_fractions[k]);
        self.regressors[k].predict(&f) >= 0.0
    }
}

/// Ridge fit via the normal equations `(X'X + lambda*I~) w = X'y` with the
/// intercept column left unpenalized; as lambda grows the slope weights
/// vanish and the prediction tends to the mean target.
fn fit_ridge(rows: &[Vec<f64>], targets: &[f64], lambda: f64) -> RidgeStep {
    let n = rows.len();
    let d = rows[0].len() + 1; // + intercept
    let mut xtx = Array2::<f64>::zeros((d, d));
    let mut xty = Array1::<f64>::zeros(d);
    for (row, &y) in rows.iter().zip(targets) {
        let augmented: Vec<f64> = row.iter().copied().chain(std::iter::once(1.0)).collect();
        for a in 0..d {
            xty[a] += augmented[a] * y;
            for b in 0..d {
                xtx[(a, b)] += augmented[a] * augmented[b];
            }
        }
    }
    for j in 0..d - 1 {
        xtx[(j, j)] += lambda;
    }
    match linalg::solve(&xtx, &xty) {
        Some(w) => RidgeStep {
            weights: w.to_vec(),
        },
        None => {
            // Singular only when lambda = 0 on degenerate features; fall back
            // to the intercept-only predictor (the mean target).
            let mut weights = vec![0.0; d];
            weights[d - 1] = targets.iter().sum::<f64>() / n as f64;
            RidgeStep { weights }
        }
    }
}

/// A per-timestamp halting predictor inside the backward recursion. Row
/// identity is passed alongside the features so the memorizing oracle can
/// look up its exact training target.
trait StepPredictor {
    fn predict_row(&self, row: usize, features: &[f64]) -> f64;
}

impl StepPredictor for RidgeStep {
    fn predict_row(&self, _row: usize, features: &[f64]) -> f64 {
        self.predict(features)
    }
}

struct Memorizer(Vec<f64>);

impl StepPredictor for Memorizer {
    fn predict_row(&self, row: usize, _features: &[f64]) -> f64 {
        self.0[row]
    }
}

/// Backward recursion shared by the real fit and the memorizing oracle.
/// `fit_step(k, rows, targets)` builds the predictor used at timestamp k;
/// returns the per-step predictors (in timestamp order) and `c*(0, .)`, the
/// per-series cost the recursion achieves on its own calibration data.
fn backward_recursion<P: StepPredictor>(
    cube: &ProbabilityCube,
    cost: &CostMatrices,
    mut fit_step: impl FnMut(usize, &[Vec<f64>], &[f64]) -> P,
) -> (Vec<P>, Vec<f64>) {
    let n = cube.n_series();
    let m = cube.n_timestamps();
    let fractions = time_fractions(cost);

    let cost_now = |k: usize, i: usize| -> f64 {
        let predicted = argmax_class(&cube.posterior_vec(i, k));
        cost.misclf(cube.labels[i], predicted) + cost.delay_at(k)
    };

    let mut best_future: Vec<f64> = (0..n).map(|i| cost_now(m - 1, i)).collect();
    let mut steps: Vec<P> = Vec::with_capacity(m - 1);
    for k in (0..m.saturating_sub(1)).rev() {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| features(&cube.posterior_vec(i, k), fractions[k]))
            .collect();
        let targets: Vec<f64> = (0..n).map(|i| best_future[i] - cost_now(k, i)).collect();
        let predictor = fit_step(k, &rows, &targets);
        for i in 0..n {
            if predictor.predict_row(i, &rows[i]) >= 0.0 {
                best_future[i] = cost_now(k, i);
            }
        }
        steps.push(predictor);
    }
    steps.reverse();
    (steps, best_future)
}

pub fn fit_calimera(
    cube: &ProbabilityCube,
    cost: &CostMatrices,
    lambda: f64,
) -> Result<CalimeraState> {
    validate_cube_cost(cube, cost)?;
    if !(lambda >= 0.0) {
        return Err(EdmError::InvalidParam(format!(
            "ridge penalty must be non-negative, got {lambda}"
        )));
    }
    let (regressors, _) =
        backward_recursion(cube, cost, |_, rows, targets| fit_ridge(rows, targets, lambda));
    Ok(CalimeraState {
        regressors,
        time_fractions: time_fractions(cost),
        lambda,
    })
}

/// Mean calibration cost achieved by the halting recursion when the per-step
/// regressor is replaced by an exact memorizer of its training targets.
/// Exercises the recursion's non-myopic structure; used by oracle tests.
pub fn memorizing_recursion_mean_cost(
    cube: &ProbabilityCube,
    cost: &CostMatrices,
) -> Result<f64> {
    validate_cube_cost(cube, cost)?;
    let (_, achieved) =
        backward_recursion(cube, cost, |_, _rows, targets| Memorizer(targets.to_vec()));
    Ok(achieved.iter().sum::<f64>() / cube.n_series() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ridge_limit_reduces_to_mean_target() {
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let targets = [1.0, 2.0, 6.0];
        let step = fit_ridge(&rows, &targets, 1e12);
        let mean = 3.0;
        for r in &rows {
            assert!((step.predict(r) - mean).abs() < 1e-3);
        }
        // Slope weights are effectively gone.
        assert!(step.weights[0].abs() < 1e-9);
        assert!(step.weights[1].abs() < 1e-9);
    }

    #[test]
    fn ridge_interpolates_with_small_penalty() {
        let rows = vec![vec![0.0], vec![1.0], vec![2.0]];
        let targets = [1.0, 3.0, 5.0]; // y = 2x + 1
        let step = fit_ridge(&rows, &targets, 1e-9);
        assert!((step.predict(&[0.5]) - 2.0).abs() < 1e-6);
    }
}
