//! Run configuration: JSON file merged with command-line flags.
//!
//! Flags override file values. Unknown keys are rejected with a line anchor
//! and a "did you mean" suggestion so typos like `"triger"` fail loudly
//! instead of silently using defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use edm_core::classifiers::{BaseConfig, KnnConfig, LogisticConfig};
use edm_core::cost::CostSpec;
use edm_core::triggers::TriggerConfig;

use crate::AppError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DatasetConfig {
    /// Tab-separated train/test files in the UCR layout.
    UcrTsv { train: PathBuf, test: PathBuf },
    /// Seeded two-class generator; the test half uses `seed + 1`.
    Synthetic {
        n_per_class: usize,
        length: usize,
        t_star: usize,
        gap: f64,
        noise_sd: f64,
    },
}

/// Cost setting: inline spec or a path to a JSON file holding one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CostSource {
    Path(String),
    Inline(CostSpec),
}

/// The fully resolved configuration of one run; everything that determines
/// report content except worker count and output location.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub dataset: DatasetConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<CostSource>,
    pub classifier: BaseConfig,
    pub trigger: TriggerConfig,
    /// Number of monitored timestamps when the cost spec is defaulted.
    pub timestamps: usize,
    pub folds: usize,
    pub seed: u64,
    pub jobs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub normalize: bool,
    /// Linear delay slope; overrides the cost spec's alpha when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

/// The same fields, all optional, as they may appear in a config file.
#[derive(Clone, Debug, Default, Deserialize)]
struct FileConfig {
    dataset: Option<DatasetConfig>,
    cost: Option<CostSource>,
    classifier: Option<BaseConfig>,
    trigger: Option<TriggerConfig>,
    timestamps: Option<usize>,
    folds: Option<usize>,
    seed: Option<u64>,
    jobs: Option<usize>,
    output: Option<PathBuf>,
    normalize: Option<bool>,
    alpha: Option<f64>,
}

/// Command-line overrides shared by `bench`, `sweep`, and `dump-trigger`.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub train: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub trigger: Option<String>,
    pub classifier: Option<String>,
    pub alpha: Option<f64>,
    pub timestamps: Option<usize>,
    pub folds: Option<usize>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub output: Option<PathBuf>,
    pub no_normalize: bool,
}

pub fn parse_config(file: Option<&Path>, overrides: &Overrides) -> Result<RunConfig, AppError> {
    let file_cfg = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                AppError::Data(format!("cannot read config {}: {e}", path.display()))
            })?;
            let value: Value = serde_json::from_str(&text)
                .map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?;
            check_unknown_keys(&value, &text)
                .map_err(|msg| AppError::Config(format!("{}: {msg}", path.display())))?;
            serde_json::from_value::<FileConfig>(value)
                .map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    resolve(file_cfg, overrides)
}

fn resolve(file: FileConfig, flags: &Overrides) -> Result<RunConfig, AppError> {
    // Dataset: --train/--test build a UCR pair, overriding the file.
    let dataset = match (&flags.train, &flags.test) {
        (Some(train), Some(test)) => DatasetConfig::UcrTsv {
            train: train.clone(),
            test: test.clone(),
        },
        (Some(train), None) | (None, Some(train)) => {
            // Allow overriding half of an existing UCR pair.
            match file.dataset.clone() {
                Some(DatasetConfig::UcrTsv {
                    train: ftrain,
                    test: ftest,
                }) => DatasetConfig::UcrTsv {
                    train: flags.train.clone().unwrap_or(ftrain),
                    test: flags.test.clone().unwrap_or(ftest),
                },
                _ => {
                    return Err(AppError::Config(format!(
                        "--train/--test must be given together (got only {})",
                        train.display()
                    )))
                }
            }
        }
        (None, None) => file.dataset.clone().ok_or_else(|| {
            AppError::Config(
                "no dataset: pass --train/--test or a config file with a \"dataset\" entry"
                    .to_string(),
            )
        })?,
    };

    let classifier = match &flags.classifier {
        Some(name) => classifier_from_name(name, file.classifier.as_ref())?,
        None => file
            .classifier
            .unwrap_or(BaseConfig::Knn(KnnConfig::default())),
    };
    let trigger = match &flags.trigger {
        Some(name) => trigger_from_name(name, file.trigger.as_ref())?,
        None => file.trigger.unwrap_or(TriggerConfig::Threshold { theta: None }),
    };

    let cfg = RunConfig {
        dataset,
        cost: file.cost,
        classifier,
        trigger,
        timestamps: flags.timestamps.or(file.timestamps).unwrap_or(20),
        folds: flags.folds.or(file.folds).unwrap_or(5),
        seed: flags.seed.or(file.seed).unwrap_or(42),
        jobs: flags.jobs.or(file.jobs).unwrap_or(1),
        output: flags.output.clone().or(file.output),
        normalize: if flags.no_normalize {
            false
        } else {
            file.normalize.unwrap_or(true)
        },
        alpha: flags.alpha.or(file.alpha),
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> Result<(), AppError> {
    if cfg.jobs < 1 {
        return Err(AppError::Config("jobs must be >= 1".to_string()));
    }
    if cfg.folds < 2 {
        return Err(AppError::Config("folds must be >= 2".to_string()));
    }
    if cfg.timestamps < 1 {
        return Err(AppError::Config("timestamps must be >= 1".to_string()));
    }
    if let Some(alpha) = cfg.alpha {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(AppError::Config(format!(
                "alpha must be a non-negative real, got {alpha}"
            )));
        }
    }
    Ok(())
}

/// A bare name picks that kind with default parameters; when the file already
/// configures the same kind, its parameters are kept.
fn classifier_from_name(
    name: &str,
    from_file: Option<&BaseConfig>,
) -> Result<BaseConfig, AppError> {
    let fresh = match name {
        "knn" => BaseConfig::Knn(KnnConfig::default()),
        "logistic" => BaseConfig::Logistic(LogisticConfig::default()),
        other => {
            return Err(AppError::Config(format!(
                "unknown classifier {other:?}; expected knn or logistic"
            )))
        }
    };
    Ok(match from_file {
        Some(existing) if existing.name() == name => existing.clone(),
        _ => fresh,
    })
}

fn trigger_from_name(
    name: &str,
    from_file: Option<&TriggerConfig>,
) -> Result<TriggerConfig, AppError> {
    let fresh = TriggerConfig::from_name(name).map_err(|e| AppError::Config(e.to_string()))?;
    Ok(match from_file {
        Some(existing) if existing.name() == name => existing.clone(),
        _ => fresh,
    })
}

const TOP_KEYS: &[&str] = &[
    "dataset",
    "cost",
    "classifier",
    "trigger",
    "timestamps",
    "folds",
    "seed",
    "jobs",
    "output",
    "normalize",
    "alpha",
];
const DATASET_KEYS: &[&str] = &[
    "kind",
    "train",
    "test",
    "n_per_class",
    "length",
    "t_star",
    "gap",
    "noise_sd",
];
const CLASSIFIER_KEYS: &[&str] = &[
    "kind",
    "k",
    "weighting",
    "features",
    "l2",
    "max_iters",
    "learning_rate",
    "seed",
    "tables",
];
const TRIGGER_KEYS: &[&str] = &["kind", "theta", "bins", "quantile", "lambda"];
const COST_KEYS: &[&str] = &["n_classes", "timestamps", "misclf", "delay"];
const DELAY_KEYS: &[&str] = &["kind", "alpha", "values"];

fn check_unknown_keys(value: &Value, raw: &str) -> Result<(), String> {
    let Some(top) = value.as_object() else {
        return Err("config must be a JSON object".to_string());
    };
    check_object(top, TOP_KEYS, raw, "")?;
    for (field, keys) in [
        ("dataset", DATASET_KEYS),
        ("classifier", CLASSIFIER_KEYS),
        ("trigger", TRIGGER_KEYS),
        ("cost", COST_KEYS),
    ] {
        if let Some(obj) = top.get(field).and_then(Value::as_object) {
            check_object(obj, keys, raw, field)?;
        }
    }
    if let Some(delay) = top
        .get("cost")
        .and_then(Value::as_object)
        .and_then(|c| c.get("delay"))
        .and_then(Value::as_object)
    {
        check_object(delay, DELAY_KEYS, raw, "cost.delay")?;
    }
    Ok(())
}

fn check_object(
    obj: &serde_json::Map<String, Value>,
    known: &[&str],
    raw: &str,
    context: &str,
) -> Result<(), String> {
    for key in obj.keys() {
        if known.contains(&key.as_str()) {
            continue;
        }
        let place = if context.is_empty() {
            String::new()
        } else {
            format!(" in \"{context}\"")
        };
        let line = line_of_key(raw, key)
            .map(|l| format!(" at line {l}"))
            .unwrap_or_default();
        let hint = closest(key, known)
            .map(|s| format!("; did you mean \"{s}\"?"))
            .unwrap_or_default();
        return Err(format!("unknown key \"{key}\"{place}{line}{hint}"));
    }
    Ok(())
}

fn line_of_key(raw: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    raw.find(&needle)
        .map(|pos| raw[..pos].bytes().filter(|&b| b == b'\n').count() + 1)
}

fn closest<'a>(key: &str, known: &[&'a str]) -> Option<&'a str> {
    known
        .iter()
        .map(|k| (levenshtein(key, k), *k))
        .filter(|(d, _)| *d <= 2)
        .min_by_key(|(d, _)| *d)
        .map(|(_, k)| k)
}

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut current = vec![0; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        current[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            current[j + 1] = sub.min(prev[j + 1] + 1).min(current[j] + 1);
        }
        std::mem::swap(&mut prev, &mut current);
    }
    prev[b.len()]
}
