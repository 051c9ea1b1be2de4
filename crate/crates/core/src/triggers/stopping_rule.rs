//! Linear stopping rule over the top posterior, the margin, and elapsed time:
//! trigger when `g1*p1 + g2*(p1 - p2) + g3*(t_k / max_T) >= 0`.
//!
//! Coefficients come from an exhaustive grid over `{-1.0, -0.9, ..., 1.0}^3`
//! minimizing the mean simulated cost — deterministic and reproducible, with
//! ties resolved to the lexicographically smallest triple.

use serde::{Deserialize, Serialize};

use super::{grid_argmin, mean_cost_unchecked, top_two, validate_cube_cost, TriggerModel};
use crate::classifiers::ProbabilityCube;
use crate::cost::CostMatrices;
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoppingRuleState {
    pub gammas: [f64; 3],
    /// `t_k / max_T` per timestamp index.
    pub time_fractions: Vec<f64>,
}

impl StoppingRuleState {
    pub fn new(gammas: [f64; 3], cost: &CostMatrices) -> StoppingRuleState {
        StoppingRuleState {
            gammas,
            time_fractions: time_fractions(cost),
        }
    }

    fn rule_value(&self, posterior: &[f64], k: usize) -> f64 {
        let (p1, p2) = top_two(posterior);
        self.gammas[0] * p1 + self.gammas[1] * (p1 - p2) + self.gammas[2] * self.time_fractions[k]
    }
}

pub(crate) fn time_fractions(cost: &CostMatrices) -> Vec<f64> {
    let max_t = cost.max_t() as f64;
    cost.timestamps().iter().map(|&t| t as f64 / max_t).collect()
}

impl TriggerModel for StoppingRuleState {
    fn should_trigger(&self, history: &[Vec<f64>]) -> bool {
        let k = history.len() - 1;
        if k + 1 >= self.time_fractions.len() {
            return true;
        }
        self.rule_value(&history[k], k) >= 0.0
    }
}

const GRID_STEPS: usize = 21;

fn grid_value(i: usize) -> f64 {
    // Single correctly-rounded division, so grid points equal their literals.
    (i as f64 - 10.0) / 10.0
}

fn triple(index: usize) -> [f64; 3] {
    [
        grid_value(index / (GRID_STEPS * GRID_STEPS)),
        grid_value((index / GRID_STEPS) % GRID_STEPS),
        grid_value(index % GRID_STEPS),
    ]
}

/// Exhaustive 21^3 grid search; candidate order is lexicographic in
/// `(g1, g2, g3)`, so the first minimum is the smallest triple.
pub fn fit_stopping_rule(cube: &ProbabilityCube, cost: &CostMatrices) -> Result<StoppingRuleState> {
    validate_cube_cost(cube, cost)?;
    let fractions = time_fractions(cost);
    let best = grid_argmin(GRID_STEPS * GRID_STEPS * GRID_STEPS, |i| {
        let candidate = StoppingRuleState {
            gammas: triple(i),
            time_fractions: fractions.clone(),
        };
        mean_cost_unchecked(&candidate, cube, cost)
    });
    Ok(StoppingRuleState {
        gammas: triple(best),
        time_fractions: fractions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triples_enumerate_lexicographically() {
        assert_eq!(triple(0), [-1.0, -1.0, -1.0]);
        assert_eq!(triple(1), [-1.0, -1.0, -0.9]);
        assert_eq!(triple(GRID_STEPS), [-1.0, -0.9, -1.0]);
        assert_eq!(triple(GRID_STEPS * GRID_STEPS * GRID_STEPS - 1), [1.0, 1.0, 1.0]);
    }
}
