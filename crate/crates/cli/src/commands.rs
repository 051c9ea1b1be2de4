//! The four harness commands: `bench`, `sweep`, `synth`, `dump-trigger`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use edm_core::cost::{build_cost_matrices, CostMatrices, CostSpec, DelayCost};
use edm_core::dataset::{
    default_timestamps, load_ucr_tsv, make_synthetic, save_ucr_tsv, z_normalize, TimeSeriesDataset,
};
use edm_core::pipeline::fit_pipeline;
use edm_core::report::{canonical_json, EvaluationReport};
use edm_core::triggers::TriggerConfig;

use crate::config::{CostSource, DatasetConfig, RunConfig};
use crate::AppError;

fn load_datasets(cfg: &RunConfig) -> Result<(TimeSeriesDataset, TimeSeriesDataset), AppError> {
    let (train, test) = match &cfg.dataset {
        DatasetConfig::UcrTsv { train, test } => (
            load_ucr_tsv(train).map_err(AppError::data)?,
            load_ucr_tsv(test).map_err(AppError::data)?,
        ),
        DatasetConfig::Synthetic {
            n_per_class,
            length,
            t_star,
            gap,
            noise_sd,
        } => {
            let make = |seed: u64| {
                make_synthetic(*n_per_class, *length, *t_star, *gap, *noise_sd, seed)
                    .map_err(AppError::config)
            };
            // The test half uses the next seed so train and test are disjoint
            // draws of the same process.
            (make(cfg.seed)?, make(cfg.seed.wrapping_add(1))?)
        }
    };
    if train.len() != test.len() {
        return Err(AppError::Data(format!(
            "train length {} != test length {}",
            train.len(),
            test.len()
        )));
    }
    if cfg.normalize {
        Ok((z_normalize(&train), z_normalize(&test)))
    } else {
        Ok((train, test))
    }
}

fn resolve_cost(cfg: &RunConfig, train: &TimeSeriesDataset) -> Result<CostMatrices, AppError> {
    let mut spec = match &cfg.cost {
        None => CostSpec::zero_one_linear(
            train.n_classes(),
            default_timestamps(train.len(), cfg.timestamps),
            cfg.alpha.unwrap_or(1.0),
        ),
        Some(CostSource::Inline(spec)) => spec.clone(),
        Some(CostSource::Path(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| AppError::Data(format!("cannot read cost spec {path}: {e}")))?;
            CostSpec::from_json(&text).map_err(AppError::config)?
        }
    };
    if cfg.cost.is_some() {
        if let Some(alpha) = cfg.alpha {
            match &mut spec.delay {
                DelayCost::Linear { alpha: a } => *a = alpha,
                DelayCost::Table { .. } => {
                    return Err(AppError::Config(
                        "alpha override conflicts with a table delay cost".to_string(),
                    ))
                }
            }
        }
    }
    if spec.n_classes != train.n_classes() {
        return Err(AppError::Config(format!(
            "cost spec has {} classes, training data {}",
            spec.n_classes,
            train.n_classes()
        )));
    }
    if spec.max_t() != train.len() {
        return Err(AppError::Config(format!(
            "cost spec max_T {} != series length {}",
            spec.max_t(),
            train.len()
        )));
    }
    build_cost_matrices(spec).map_err(AppError::config)
}

/// sha256 of the canonical config JSON with the fields that must not affect
/// report content (worker count, output path) removed.
pub fn config_digest(cfg: &RunConfig) -> String {
    let mut value = serde_json::to_value(cfg).expect("config serializes");
    if let Some(obj) = value.as_object_mut() {
        obj.remove("jobs");
        obj.remove("output");
    }
    let bytes = Sha256::digest(canonical_json(&value).as_bytes());
    let mut hex = String::with_capacity(64);
    for b in bytes {
        let _ = write!(hex, "{b:02x}");
    }
    hex
}

/// Fits on train, scores on test, stamps reproducibility metadata.
pub fn run_bench(cfg: &RunConfig) -> Result<EvaluationReport, AppError> {
    let (train, test) = load_datasets(cfg)?;
    let cost = resolve_cost(cfg, &train)?;
    let pipeline = fit_pipeline(
        &train,
        &cost,
        &cfg.classifier,
        &cfg.trigger,
        cfg.folds,
        cfg.seed,
    )
    .map_err(AppError::data)?;
    let mut report = pipeline.score(&test).map_err(AppError::data)?;
    report.seed = cfg.seed;
    report.jobs = cfg.jobs;
    report.config_digest = config_digest(cfg);
    Ok(report)
}

pub fn cmd_bench(cfg: &RunConfig) -> Result<(), AppError> {
    let report = run_bench(cfg)?;
    emit(cfg.output.as_deref(), &report.to_canonical_json())
}

/// Calibrates the trigger exactly as `bench` would and dumps its fitted
/// parameters as JSON.
pub fn cmd_dump_trigger(cfg: &RunConfig) -> Result<(), AppError> {
    let (train, _) = load_datasets(cfg)?;
    let cost = resolve_cost(cfg, &train)?;
    let pipeline = fit_pipeline(
        &train,
        &cost,
        &cfg.classifier,
        &cfg.trigger,
        cfg.folds,
        cfg.seed,
    )
    .map_err(AppError::data)?;
    emit(cfg.output.as_deref(), &pipeline.trigger.to_parameter_json())
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), AppError> {
    match path {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| AppError::Data(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// One sweep cell: the run's identity plus its outcome.
struct SweepCell {
    trigger: String,
    alpha: f64,
    result: Result<EvaluationReport, AppError>,
}

/// Cartesian product of trigger names and alphas; one report file per combo
/// plus an index CSV. Individual failures land in the index's status column
/// without aborting the sweep.
pub fn cmd_sweep(
    cfg: &RunConfig,
    triggers: &[String],
    alphas: &[f64],
    out_dir: &Path,
) -> Result<(), AppError> {
    if triggers.is_empty() || alphas.is_empty() {
        return Err(AppError::Config(
            "sweep needs at least one trigger and one alpha".to_string(),
        ));
    }
    // Validate names up front: a typo should kill the sweep, not one cell.
    for name in triggers {
        TriggerConfig::from_name(name).map_err(AppError::config)?;
    }
    std::fs::create_dir_all(out_dir)
        .map_err(|e| AppError::Data(format!("cannot create {}: {e}", out_dir.display())))?;

    let mut combos: Vec<(String, f64)> = triggers
        .iter()
        .flat_map(|t| alphas.iter().map(move |&a| (t.clone(), a)))
        .collect();
    combos.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));

    let cells: Vec<SweepCell> = combos
        .par_iter()
        .map(|(trigger, alpha)| {
            let mut run_cfg = cfg.clone();
            run_cfg.trigger = TriggerConfig::from_name(trigger).expect("validated above");
            run_cfg.alpha = Some(*alpha);
            SweepCell {
                trigger: trigger.clone(),
                alpha: *alpha,
                result: run_bench(&run_cfg),
            }
        })
        .collect();

    let mut index = String::from("trigger,alpha,avg_cost,accuracy,earliness,status\n");
    for cell in &cells {
        match &cell.result {
            Ok(report) => {
                let path = out_dir.join(format!("{}_alpha{}.json", cell.trigger, cell.alpha));
                std::fs::write(&path, report.to_canonical_json())
                    .map_err(|e| AppError::Data(format!("cannot write {}: {e}", path.display())))?;
                let _ = writeln!(
                    index,
                    "{},{},{},{},{},ok",
                    cell.trigger, cell.alpha, report.avg_cost, report.accuracy, report.earliness
                );
            }
            Err(err) => {
                let _ = writeln!(
                    index,
                    "{},{},,,,{}",
                    cell.trigger,
                    cell.alpha,
                    csv_quote(&err.to_string())
                );
            }
        }
    }
    let index_path = out_dir.join("index.csv");
    std::fs::write(&index_path, index)
        .map_err(|e| AppError::Data(format!("cannot write {}: {e}", index_path.display())))?;
    Ok(())
}

fn csv_quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

pub struct SynthParams {
    pub n_per_class: usize,
    pub length: usize,
    pub t_star: usize,
    pub gap: f64,
    pub noise_sd: f64,
    pub seed: u64,
}

/// Writes a synthetic train/test pair as UCR TSV files under `prefix`.
pub fn cmd_synth(params: &SynthParams, prefix: &Path) -> Result<(PathBuf, PathBuf), AppError> {
    let make = |seed: u64| {
        make_synthetic(
            params.n_per_class,
            params.length,
            params.t_star,
            params.gap,
            params.noise_sd,
            seed,
        )
        .map_err(AppError::config)
    };
    let train = make(params.seed)?;
    let test = make(params.seed.wrapping_add(1))?;
    if let Some(dir) = prefix.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)
                .map_err(|e| AppError::Data(format!("cannot create {}: {e}", dir.display())))?;
        }
    }
    let stem = prefix
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "synthetic".to_string());
    let dir = prefix.parent().unwrap_or_else(|| Path::new("."));
    let train_path = dir.join(format!("{stem}_TRAIN.tsv"));
    let test_path = dir.join(format!("{stem}_TEST.tsv"));
    save_ucr_tsv(&train, &train_path).map_err(AppError::data)?;
    save_ucr_tsv(&test, &test_path).map_err(AppError::data)?;
    Ok((train_path, test_path))
}
