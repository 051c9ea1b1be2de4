//! Trigger models: decide at each monitored timestamp whether to act now or
//! wait for more of the series.
//!
//! Every model is calibrated against a [`ProbabilityCube`] and a
//! [`CostMatrices`] and then answers [`TriggerModel::should_trigger`] given
//! the posterior history seen so far. Two rules hold for all of them:
//!
//! - the final timestamp always triggers (forced decision);
//! - all boundary comparisons are inclusive and all ties resolve toward
//!   earlier triggering / smaller parameters, so fits are deterministic.
//!
//! Grid searches minimize [`simulate_policy`], the mean decision cost of
//! walking each calibration series and stopping at the first trigger. The
//! candidates are evaluated concurrently; the winner is the first candidate
//! attaining the minimum, which keeps the result schedule-independent.

mod calimera;
mod ecec;
mod economy_gamma;
mod stopping_rule;
mod teaser;
mod threshold;

pub use calimera::{fit_calimera, memorizing_recursion_mean_cost, CalimeraState, RidgeStep};
pub use ecec::{fit_ecec, EcecState};
pub use economy_gamma::{fit_economy_gamma, EconomyGammaState};
pub use stopping_rule::{fit_stopping_rule, StoppingRuleState};
pub use teaser::{fit_teaser, TeaserEnvelope, TeaserState};
pub use threshold::{fit_threshold, ThresholdState};

use serde::{Deserialize, Serialize};

use crate::classifiers::{argmax_class, ProbabilityCube};
use crate::cost::CostMatrices;
use crate::error::{EdmError, Result};
use crate::exec;

/// Halting-policy contract. `history` holds the posterior vectors for
/// timestamp indices `0..=k`; the decision concerns the last entry.
pub trait TriggerModel {
    /// True when the policy wants to classify now. Must return true at the
    /// final timestamp index for every input.
    fn should_trigger(&self, history: &[Vec<f64>]) -> bool;
}

/// The two largest posterior values `(p1, p2)`.
pub(crate) fn top_two(posterior: &[f64]) -> (f64, f64) {
    let mut p1 = f64::NEG_INFINITY;
    let mut p2 = f64::NEG_INFINITY;
    for &p in posterior {
        if p > p1 {
            p2 = p1;
            p1 = p;
        } else if p > p2 {
            p2 = p;
        }
    }
    if posterior.len() < 2 {
        p2 = 0.0;
    }
    (p1, p2)
}

pub(crate) fn validate_cube_cost(cube: &ProbabilityCube, cost: &CostMatrices) -> Result<()> {
    if cube.n_series() == 0 {
        return Err(EdmError::EmptyCube);
    }
    if cube.n_timestamps() != cost.n_timestamps() {
        return Err(EdmError::TimestampMismatch(format!(
            "cube has {} timestamps, cost matrices {}",
            cube.n_timestamps(),
            cost.n_timestamps()
        )));
    }
    if cube.n_classes() != cost.n_classes() {
        return Err(EdmError::TimestampMismatch(format!(
            "cube has {} classes, cost matrices {}",
            cube.n_classes(),
            cost.n_classes()
        )));
    }
    if cube.labels.iter().any(|&y| y >= cost.n_classes()) {
        return Err(EdmError::IndexOutOfRange(
            "cube label outside cost matrix classes".to_string(),
        ));
    }
    Ok(())
}

/// Where a policy stopped on one calibration series and what it predicted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Decision {
    pub k: usize,
    pub predicted: usize,
}

/// Walks each calibration series in timestamp order, stopping at the first
/// trigger (the final timestamp is forced).
pub fn simulate_decisions<T: TriggerModel + ?Sized>(
    trigger: &T,
    cube: &ProbabilityCube,
    cost: &CostMatrices,
) -> Result<Vec<Decision>> {
    validate_cube_cost(cube, cost)?;
    Ok(decisions_unchecked(trigger, cube))
}

/// Mean decision cost of the policy over the calibration cube — the single
/// objective every grid search minimizes.
pub fn simulate_policy<T: TriggerModel + ?Sized>(
    trigger: &T,
    cube: &ProbabilityCube,
    cost: &CostMatrices,
) -> Result<f64> {
    validate_cube_cost(cube, cost)?;
    Ok(mean_cost_unchecked(trigger, cube, cost))
}

pub(crate) fn decisions_unchecked<T: TriggerModel + ?Sized>(
    trigger: &T,
    cube: &ProbabilityCube,
) -> Vec<Decision> {
    let m = cube.n_timestamps();
    (0..cube.n_series())
        .map(|i| {
            let mut history = Vec::with_capacity(m);
            for k in 0..m {
                history.push(cube.posterior_vec(i, k));
                if k + 1 == m || trigger.should_trigger(&history) {
                    return Decision {
                        k,
                        predicted: argmax_class(&history[k]),
                    };
                }
            }
            unreachable!("final timestamp always decides")
        })
        .collect()
}

pub(crate) fn mean_cost_unchecked<T: TriggerModel + ?Sized>(
    trigger: &T,
    cube: &ProbabilityCube,
    cost: &CostMatrices,
) -> f64 {
    let decisions = decisions_unchecked(trigger, cube);
    let total: f64 = decisions
        .iter()
        .zip(&cube.labels)
        .map(|(d, &y)| cost.table(d.k)[(y, d.predicted)])
        .sum();
    total / cube.n_series() as f64
}

/// Evaluates the candidates concurrently and returns the index of the first
/// one attaining the minimal cost.
pub(crate) fn grid_argmin<F>(n_candidates: usize, cost_of: F) -> usize
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let costs: Vec<f64> = exec::map_indices(n_candidates, cost_of);
    let mut best = 0;
    for (i, &c) in costs.iter().enumerate().skip(1) {
        if c < costs[best] {
            best = i;
        }
    }
    best
}

/// Fitted trigger-model state, serializable for blobs and parameter dumps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum Trigger {
    Threshold(ThresholdState),
    StoppingRule(StoppingRuleState),
    EconomyGamma(EconomyGammaState),
    Ecec(EcecState),
    Teaser(TeaserState),
    Calimera(CalimeraState),
}

impl TriggerModel for Trigger {
    fn should_trigger(&self, history: &[Vec<f64>]) -> bool {
        match self {
            Trigger::Threshold(s) => s.should_trigger(history),
            Trigger::StoppingRule(s) => s.should_trigger(history),
            Trigger::EconomyGamma(s) => s.should_trigger(history),
            Trigger::Ecec(s) => s.should_trigger(history),
            Trigger::Teaser(s) => s.should_trigger(history),
            Trigger::Calimera(s) => s.should_trigger(history),
        }
    }
}

impl Trigger {
    pub fn name(&self) -> &'static str {
        match self {
            Trigger::Threshold(_) => "threshold",
            Trigger::StoppingRule(_) => "stopping-rule",
            Trigger::EconomyGamma(_) => "economy-gamma",
            Trigger::Ecec(_) => "ecec",
            Trigger::Teaser(_) => "teaser",
            Trigger::Calimera(_) => "calimera",
        }
    }

    /// Calibrates the chosen model against the cube and cost setting.
    pub fn fit(
        config: &TriggerConfig,
        cube: &ProbabilityCube,
        cost: &CostMatrices,
    ) -> Result<Trigger> {
        Ok(match config {
            TriggerConfig::Threshold { theta: Some(theta) } => {
                if !(0.0..=1.0).contains(theta) {
                    return Err(EdmError::InvalidParam(format!(
                        "theta must lie in [0, 1], got {theta}"
                    )));
                }
                // Explicit theta skips fitting altogether.
                Trigger::Threshold(ThresholdState::fixed(*theta, cost.n_timestamps()))
            }
            TriggerConfig::Threshold { theta: None } => {
                Trigger::Threshold(fit_threshold(cube, cost)?)
            }
            TriggerConfig::StoppingRule {} => Trigger::StoppingRule(fit_stopping_rule(cube, cost)?),
            TriggerConfig::EconomyGamma { bins } => {
                Trigger::EconomyGamma(fit_economy_gamma(cube, cost, bins.unwrap_or(5))?)
            }
            TriggerConfig::Ecec {} => Trigger::Ecec(fit_ecec(cube, cost)?),
            TriggerConfig::Teaser { quantile } => {
                Trigger::Teaser(fit_teaser(cube, cost, quantile.unwrap_or(0.95))?)
            }
            TriggerConfig::Calimera { lambda } => {
                Trigger::Calimera(fit_calimera(cube, cost, lambda.unwrap_or(1.0))?)
            }
        })
    }

    pub fn to_parameter_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trigger state serializes")
    }
}

/// Which trigger model to fit, plus its hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TriggerConfig {
    /// `theta: Some(..)` skips fitting and uses the fixed threshold.
    Threshold {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<f64>,
    },
    StoppingRule {},
    EconomyGamma {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bins: Option<usize>,
    },
    Ecec {},
    Teaser {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quantile: Option<f64>,
    },
    Calimera {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda: Option<f64>,
    },
}

impl TriggerConfig {
    pub fn name(&self) -> &'static str {
        match self {
            TriggerConfig::Threshold { .. } => "threshold",
            TriggerConfig::StoppingRule {} => "stopping-rule",
            TriggerConfig::EconomyGamma { .. } => "economy-gamma",
            TriggerConfig::Ecec {} => "ecec",
            TriggerConfig::Teaser { .. } => "teaser",
            TriggerConfig::Calimera { .. } => "calimera",
        }
    }

    /// Parses a bare model name into its default configuration.
    pub fn from_name(name: &str) -> Result<TriggerConfig> {
        Ok(match name {
            "threshold" => TriggerConfig::Threshold { theta: None },
            "stopping-rule" => TriggerConfig::StoppingRule {},
            "economy-gamma" => TriggerConfig::EconomyGamma { bins: None },
            "ecec" => TriggerConfig::Ecec {},
            "teaser" => TriggerConfig::Teaser { quantile: None },
            "calimera" => TriggerConfig::Calimera { lambda: None },
            other => {
                return Err(EdmError::InvalidParam(format!(
                    "unknown trigger model {other:?}; expected one of threshold, \
                     stopping-rule, economy-gamma, ecec, teaser, calimera"
                )))
            }
        })
    }

    pub fn all_names() -> [&'static str; 6] {
        [
            "threshold",
            "stopping-rule",
            "economy-gamma",
            "ecec",
            "teaser",
            "calimera",
        ]
    }
}
