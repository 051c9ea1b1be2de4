//! Expected-cost forecasting over confidence bins.
//!
//! Calibration series are grouped, per timestamp, into K equal-frequency bins
//! of their maximum posterior. The model learns (a) the expected
//! misclassification cost per (timestamp, bin) and (b) Laplace-smoothed
//! K x K transition matrices between consecutive timestamps. At decision
//! time it forecasts the expected cost of stopping at every future timestamp
//! by chaining the transition matrices from the current bin, and waits only
//! while some future timestamp looks strictly cheaper than stopping now.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{top_two, validate_cube_cost, TriggerModel};
use crate::classifiers::{argmax_class, ProbabilityCube};
use crate::cost::CostMatrices;
use crate::error::{EdmError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EconomyGammaState {
    /// K, the configured bin count. Timestamps with fewer distinct
    /// max-posterior values may use fewer bins.
    pub n_bins: usize,
    /// Per timestamp: sorted interior boundaries (at most K-1). The bin of a
    /// value is the number of boundaries <= value.
    pub boundaries: Vec<Vec<f64>>,
    /// Per timestamp: expected misclassification cost per bin; bins that
    /// received no calibration member hold the timestamp's global mean.
    pub expected_costs: Vec<Vec<f64>>,
    /// `transitions[k]` maps bins at timestamp k to bins at k+1,
    /// Laplace-smoothed: `(count + 1) / (row_total + K)`.
    pub transitions: Vec<Array2<f64>>,
    /// Delay cost per timestamp index, baked in at fit time.
    pub delays: Vec<f64>,
}

fn bin_of(value: f64, boundaries: &[f64]) -> usize {
    boundaries.partition_point(|b| *b <= value)
}

/// Equal-frequency cut points over the sorted values: the boundary between
/// chunks j-1 and j sits at the midpoint of the order statistics around
/// position `j*n/K`. Duplicate midpoints collapse, which is how timestamps
/// with few distinct values end up with fewer bins.
fn equal_frequency_boundaries(sorted: &[f64], k: usize) -> Vec<f64> {
    let n = sorted.len();
    let mut bounds = Vec::new();
    for j in 1..k {
        let idx = j * n / k;
        if idx == 0 || idx >= n {
            continue;
        }
        let b = 0.5 * (sorted[idx - 1] + sorted[idx]);
        if sorted[idx - 1] == sorted[idx] {
            // Midpoint of equal values would split ties between bins.
            continue;
        }
        if bounds.last() != Some(&b) {
            bounds.push(b);
        }
    }
    bounds
}

pub fn fit_economy_gamma(
    cube: &ProbabilityCube,
    cost: &CostMatrices,
    n_bins: usize,
) -> Result<EconomyGammaState> {
    validate_cube_cost(cube, cost)?;
    if n_bins < 1 {
        return Err(EdmError::InvalidParam(
            "economy-gamma needs at least one bin".to_string(),
        ));
    }
    let n = cube.n_series();
    let m = cube.n_timestamps();

    let mut boundaries = Vec::with_capacity(m);
    let mut assignments = vec![vec![0usize; n]; m];
    let mut misclf_costs = vec![vec![0.0f64; n]; m];
    for k in 0..m {
        let maxes: Vec<f64> = (0..n).map(|i| top_two(&cube.posterior_vec(i, k)).0).collect();
        let mut sorted = maxes.clone();
        sorted.sort_by(f64::total_cmp);
        let bounds = equal_frequency_boundaries(&sorted, n_bins);
        for i in 0..n {
            assignments[k][i] = bin_of(maxes[i], &bounds);
            let predicted = argmax_class(&cube.posterior_vec(i, k));
            misclf_costs[k][i] = cost.misclf(cube.labels[i], predicted);
        }
        boundaries.push(bounds);
    }

    let mut expected_costs = Vec::with_capacity(m);
    for k in 0..m {
        let global = misclf_costs[k].iter().sum::<f64>() / n as f64;
        let mut sums = vec![0.0; n_bins];
        let mut counts = vec![0usize; n_bins];
        for i in 0..n {
            sums[assignments[k][i]] += misclf_costs[k][i];
            counts[assignments[k][i]] += 1;
        }
        let costs: Vec<f64> = (0..n_bins)
            .map(|g| if counts[g] > 0 { sums[g] / counts[g] as f64 } else { global })
            .collect();
        expected_costs.push(costs);
    }

    let mut transitions = Vec::with_capacity(m.saturating_sub(1));
    for k in 0..m.saturating_sub(1) {
        let mut counts = Array2::<f64>::zeros((n_bins, n_bins));
        for i in 0..n {
            counts[(assignments[k][i], assignments[k + 1][i])] += 1.0;
        }
        let matrix = Array2::from_shape_fn((n_bins, n_bins), |(g, h)| {
            let row_total: f64 = counts.row(g).sum();
            (counts[(g, h)] + 1.0) / (row_total + n_bins as f64)
        });
        transitions.push(matrix);
    }

    let delays = (0..m).map(|k| cost.delay_at(k)).collect();
    Ok(EconomyGammaState {
        n_bins,
        boundaries,
        expected_costs,
        transitions,
        delays,
    })
}

impl EconomyGammaState {
    fn n_timestamps(&self) -> usize {
        self.delays.len()
    }

    /// Forecast of the expected decision cost for stopping at each timestamp
    /// `tau >= k`, starting from the current bin at `k`.
    fn forecast(&self, current_bin: usize, k: usize) -> Vec<f64> {
        let m = self.n_timestamps();
        let mut dist = vec![0.0; self.n_bins];
        dist[current_bin.min(self.n_bins - 1)] = 1.0;
        let mut out = Vec::with_capacity(m - k);
        out.push(self.expected_costs[k][current_bin.min(self.n_bins - 1)] + self.delays[k]);
        for tau in k + 1..m {
            let step = &self.transitions[tau - 1];
            let mut next = vec![0.0; self.n_bins];
            for (g, &p) in dist.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                for h in 0..self.n_bins {
                    next[h] += p * step[(g, h)];
                }
            }
            dist = next;
            let expected: f64 = dist
                .iter()
                .zip(&self.expected_costs[tau])
                .map(|(p, c)| p * c)
                .sum();
            out.push(expected + self.delays[tau]);
        }
        out
    }
}

impl TriggerModel for EconomyGammaState {
    fn should_trigger(&self, history: &[Vec<f64>]) -> bool {
        let k = history.len() - 1;
        if k + 1 >= self.n_timestamps() {
            return true;
        }
        let bin = bin_of(top_two(&history[k]).0, &self.boundaries[k]);
        let forecast = self.forecast(bin, k);
        // Stop unless some strictly-later timestamp is strictly cheaper.
        forecast[1..].iter().all(|&future| forecast[0] <= future)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bins_count_boundaries_at_or_below() {
        let bounds = [0.3, 0.7];
        assert_eq!(bin_of(0.1, &bounds), 0);
        assert_eq!(bin_of(0.3, &bounds), 1); // boundary value goes up
        assert_eq!(bin_of(0.5, &bounds), 1);
        assert_eq!(bin_of(0.9, &bounds), 2);
    }

    #[test]
    fn equal_frequency_midpoints() {
        let sorted = [0.55, 0.6, 0.8, 0.9];
        assert_eq!(equal_frequency_boundaries(&sorted, 2), vec![0.7]);
        // All values identical: no boundaries, one bin.
        assert_eq!(equal_frequency_boundaries(&[0.5, 0.5, 0.5], 3), Vec::<f64>::new());
    }
}
