//! Probability-threshold baseline: act as soon as the top posterior reaches
//! `theta`.

use serde::{Deserialize, Serialize};

use super::{grid_argmin, mean_cost_unchecked, top_two, validate_cube_cost, TriggerModel};
use crate::classifiers::ProbabilityCube;
use crate::cost::CostMatrices;
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdState {
    pub theta: f64,
    pub n_timestamps: usize,
}

impl ThresholdState {
    /// A fixed threshold, bypassing calibration.
    pub fn fixed(theta: f64, n_timestamps: usize) -> ThresholdState {
        ThresholdState {
            theta,
            n_timestamps,
        }
    }
}

impl TriggerModel for ThresholdState {
    fn should_trigger(&self, history: &[Vec<f64>]) -> bool {
        let k = history.len() - 1;
        if k + 1 >= self.n_timestamps {
            return true;
        }
        top_two(&history[k]).0 >= self.theta
    }
}

/// Picks `theta` from the grid `{0.00, 0.01, ..., 1.00}` minimizing the mean
/// simulated decision cost; ties go to the smallest theta.
pub fn fit_threshold(cube: &ProbabilityCube, cost: &CostMatrices) -> Result<ThresholdState> {
    validate_cube_cost(cube, cost)?;
    let m = cost.n_timestamps();
    let best = grid_argmin(101, |i| {
        let candidate = ThresholdState::fixed(i as f64 / 100.0, m);
        mean_cost_unchecked(&candidate, cube, cost)
    });
    Ok(ThresholdState::fixed(best as f64 / 100.0, m))
}
