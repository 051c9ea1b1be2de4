//! Consecutive-acceptance trigger.
//!
//! Each timestamp gets a Gaussian envelope fitted on the posterior features
//! of calibration instances that were classified correctly there. A new
//! posterior is "accepted" when its squared standardized distance to the
//! envelope stays under an empirical quantile of the training scores; the
//! series halts after `v` consecutive acceptances, with `v` picked by grid
//! search over 1..=5.

use serde::{Deserialize, Serialize};

use super::{grid_argmin, mean_cost_unchecked, top_two, validate_cube_cost, TriggerModel};
use crate::classifiers::{argmax_class, ProbabilityCube};
use crate::cost::CostMatrices;
use crate::error::{EdmError, Result};

const VAR_FLOOR: f64 = 1e-9;
const MAX_CONSECUTIVE: usize = 5;

/// Per-timestamp acceptance region: feature means, per-feature variance
/// (floored), and the score threshold at the configured quantile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TeaserEnvelope {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    pub threshold: f64,
}

impl TeaserEnvelope {
    fn score(&self, features: &[f64]) -> f64 {
        features
            .iter()
            .zip(self.mean.iter().zip(&self.var))
            .map(|(x, (m, v))| (x - m) * (x - m) / (v + VAR_FLOOR))
            .sum()
    }

    fn accepts(&self, features: &[f64]) -> bool {
        self.score(features) <= self.threshold
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TeaserState {
    pub envelopes: Vec<TeaserEnvelope>,
    /// Required run of consecutive acceptances.
    pub v: usize,
}

/// Posterior features: the probability vector plus the top-two margin.
fn features(posterior: &[f64]) -> Vec<f64> {
    let (p1, p2) = top_two(posterior);
    let mut f = posterior.to_vec();
    f.push(p1 - p2);
    f
}

impl TriggerModel for TeaserState {
    fn should_trigger(&self, history: &[Vec<f64>]) -> bool {
        let k = history.len() - 1;
        if k + 1 >= self.envelopes.len() {
            return true;
        }
        // Run length of consecutive acceptances ending at k; a rejection
        // anywhere resets the count.
        let mut run = 0;
        for j in (0..=k).rev() {
            if self.envelopes[j].accepts(&features(&history[j])) {
                run += 1;
            } else {
                break;
            }
        }
        run >= self.v
    }
}

/// Empirical q-quantile as the order statistic at `ceil(q * n) - 1`;
/// `q = 1.0` yields the maximum, so every in-sample score is admitted.
fn empirical_quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let idx = ((q * n as f64).ceil() as usize).clamp(1, n) - 1;
    sorted[idx]
}

fn fit_envelope(rows: &[Vec<f64>], q: f64) -> TeaserEnvelope {
    let n = rows.len() as f64;
    let d = rows[0].len();
    let mean: Vec<f64> = (0..d)
        .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n)
        .collect();
    let var: Vec<f64> = (0..d)
        .map(|j| rows.iter().map(|r| (r[j] - mean[j]) * (r[j] - mean[j])).sum::<f64>() / n)
        .collect();
    let probe = TeaserEnvelope {
        mean,
        var,
        threshold: 0.0,
    };
    let mut scores: Vec<f64> = rows.iter().map(|r| probe.score(r)).collect();
    scores.sort_by(f64::total_cmp);
    TeaserEnvelope {
        threshold: empirical_quantile(&scores, q),
        ..probe
    }
}

pub fn fit_teaser(cube: &ProbabilityCube, cost: &CostMatrices, q: f64) -> Result<TeaserState> {
    validate_cube_cost(cube, cost)?;
    if !(0.0..=1.0).contains(&q) {
        return Err(EdmError::InvalidParam(format!(
            "quantile must lie in [0, 1], got {q}"
        )));
    }
    let envelopes: Vec<TeaserEnvelope> = (0..cube.n_timestamps())
        .map(|k| {
            let all: Vec<Vec<f64>> = (0..cube.n_series())
                .map(|i| features(&cube.posterior_vec(i, k)))
                .collect();
            let correct: Vec<Vec<f64>> = (0..cube.n_series())
                .filter(|&i| argmax_class(&cube.posterior_vec(i, k)) == cube.labels[i])
                .map(|i| features(&cube.posterior_vec(i, k)))
                .collect();
            // No correct instance at this timestamp: fall back to everything.
            fit_envelope(if correct.is_empty() { &all } else { &correct }, q)
        })
        .collect();

    let best = grid_argmin(MAX_CONSECUTIVE, |i| {
        let candidate = TeaserState {
            envelopes: envelopes.clone(),
            v: i + 1,
        };
        mean_cost_unchecked(&candidate, cube, cost)
    });
    Ok(TeaserState {
        envelopes,
        v: best + 1,
    })
}
