//! Cross-validated benchmark runner.
//!
//! For every dataset and sampler, each grid point is scored by stratified
//! k-fold CV: standardize on the training fold, resample the training fold
//! only, train an RBF SVM and score the untouched test fold. The grid point
//! with the best mean F1 is reported, ties going to smaller `k`, then
//! smaller `eta`. All randomness comes from seeds derived from the config
//! seed and the unit's coordinates, so the worker count never changes the
//! output.

mod config;
mod report;

pub use config::{
    DataSource, DatasetConfig, ExperimentConfig, Metric, OutputConfig, OutputFormat, SamplerGrid,
    DEFAULT_ETA_GRID, DEFAULT_K_GRID,
};
pub use report::{emit, ExperimentReport, ReportRow};

use std::collections::HashMap;

use rayon::prelude::*;

use crate::data::{fit_standardizer, stratified_kfold, LabeledDataset, Standardizer};
use crate::error::{Error, Result};
use crate::metrics::{
    aggregate, confusion, f_beta, minority_accuracy, overall_accuracy, ConfusionCounts,
};
use crate::samplers::{resample, SamplerSpec};
use crate::seed::SeedMixer;
use crate::svm::{self, SvmConfig};

/// Environment variable holding the worker thread count.
pub const WORKERS_ENV: &str = "AOS_WORKERS";

/// Worker count from [`WORKERS_ENV`], else the available parallelism.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_with_workers(config, default_workers())
}

pub fn run_with_workers(config: &ExperimentConfig, workers: usize) -> Result<ExperimentReport> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| run_inner(config))
}

/// Standardized train and test halves of one fold.
struct Fold {
    train: LabeledDataset,
    test: LabeledDataset,
}

fn prepare_folds(d: &LabeledDataset, config: &ExperimentConfig, name: &str) -> Result<Vec<Fold>> {
    let seed = SeedMixer::new(config.seed).str(name).str("folds").finish();
    let plan = stratified_kfold(d, config.folds, seed)?;
    plan.assignments
        .iter()
        .map(|(train_idx, test_idx)| {
            let train = d.subset(train_idx)?;
            let test = d.subset(test_idx)?;
            if config.audit {
                audit_fold(d, &train, &test)?;
            }
            let s: Standardizer = fit_standardizer(&train);
            let train = train.with_features(s.transform(train.features())?)?;
            let test = test.with_features(s.transform(test.features())?)?;
            Ok(Fold { train, test })
        })
        .collect()
}

fn row_key(row: ndarray::ArrayView1<f64>) -> Vec<u64> {
    row.iter().map(|v| (v + 0.0).to_bits()).collect()
}

fn row_counts(x: &ndarray::Array2<f64>) -> HashMap<Vec<u64>, usize> {
    let mut m = HashMap::new();
    for r in x.rows() {
        *m.entry(row_key(r)).or_default() += 1;
    }
    m
}

/// Fails if a test row reaches the resampler input more often than the source
/// data's own duplicates can explain.
fn audit_fold(
    source: &LabeledDataset,
    train: &LabeledDataset,
    test: &LabeledDataset,
) -> Result<()> {
    let full = row_counts(source.features());
    let in_test = row_counts(test.features());
    let in_train = row_counts(train.features());
    for (key, t) in &in_test {
        let tr = in_train.get(key).copied().unwrap_or(0);
        if tr + t > full.get(key).copied().unwrap_or(0) {
            return Err(Error::invalid(format!(
                "audit: a test row appears {tr} time(s) in the training input"
            )));
        }
    }
    Ok(())
}

struct FoldScore {
    counts: ConfusionCounts,
}

fn evaluate_fold(fold: &Fold, spec: &SamplerSpec) -> Result<FoldScore> {
    let resampled = resample(&fold.train, spec)?;
    let train = &resampled.dataset;
    debug_assert!(
        train
            .features()
            .slice(ndarray::s![..fold.train.n_samples(), ..])
            == fold.train.features()
    );
    let model = svm::train(
        train.features().view(),
        &train.signed_targets(),
        &SvmConfig::default(),
    )?;
    let pred = model.predict(fold.test.features().view())?;
    let truth = fold.test.signed_targets();
    Ok(FoldScore {
        counts: confusion(&truth, &pred, &1.0)?,
    })
}

fn metric_value(metric: Metric, c: &ConfusionCounts) -> f64 {
    match metric {
        Metric::F1 => f_beta(c, 1.0),
        Metric::F2 => f_beta(c, 2.0),
        Metric::MinorityAcc => minority_accuracy(c),
        Metric::OverallAcc => overall_accuracy(c),
    }
}

fn unit_seed(config: &ExperimentConfig, dataset: &str, spec: &SamplerSpec, fold: usize) -> u64 {
    SeedMixer::new(config.seed)
        .str(dataset)
        .str(spec.kind.name())
        .int(spec.k as u64)
        .int(spec.eta.to_bits())
        .int(spec.r as u64)
        .int(fold as u64)
        .finish()
}

fn run_inner(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::default();
    for ds in &config.datasets {
        let data = match ds.source.load() {
            Ok(d) => d,
            Err(e) => {
                log::error!("skipping dataset `{}`: {e}", ds.name);
                continue;
            }
        };
        let folds = match prepare_folds(&data, config, &ds.name) {
            Ok(f) => f,
            Err(e) => {
                log::error!("skipping dataset `{}`: {e}", ds.name);
                continue;
            }
        };
        let grids: Vec<Vec<SamplerSpec>> =
            config.samplers.iter().map(SamplerGrid::points).collect();
        let n_folds = folds.len();
        let units: Vec<(usize, usize, usize)> = grids
            .iter()
            .enumerate()
            .flat_map(|(s, pts)| {
                (0..pts.len()).flat_map(move |g| (0..n_folds).map(move |f| (s, g, f)))
            })
            .collect();
        let results: Vec<Result<FoldScore>> = units
            .par_iter()
            .map(|&(s, g, f)| {
                let spec = SamplerSpec {
                    seed: unit_seed(config, &ds.name, &grids[s][g], f),
                    ..grids[s][g]
                };
                evaluate_fold(&folds[f], &spec)
            })
            .collect();

        let mut results = results.into_iter();
        for (s, pts) in grids.iter().enumerate() {
            let mut best: Option<(f64, &SamplerSpec, Vec<ConfusionCounts>)> = None;
            for spec in pts {
                let per_fold: Result<Vec<ConfusionCounts>> = results
                    .by_ref()
                    .take(folds.len())
                    .map(|r| r.map(|f| f.counts))
                    .collect();
                let per_fold = match per_fold {
                    Ok(p) => p,
                    Err(e) => {
                        log::warn!(
                            "{} on `{}` with k={} eta={} failed: {e}",
                            spec.kind,
                            ds.name,
                            spec.k,
                            spec.eta
                        );
                        continue;
                    }
                };
                let f1 =
                    per_fold.iter().map(|c| f_beta(c, 1.0)).sum::<f64>() / per_fold.len() as f64;
                if best.as_ref().is_none_or(|(b, _, _)| f1 > *b) {
                    best = Some((f1, spec, per_fold));
                }
            }
            let Some((_, spec, per_fold)) = best else {
                log::error!(
                    "sampler {} produced no result on `{}`",
                    config.samplers[s].kind,
                    ds.name
                );
                continue;
            };
            let scores = config
                .metrics
                .iter()
                .map(|&m| {
                    let vals: Vec<f64> = per_fold.iter().map(|c| metric_value(m, c)).collect();
                    Ok((m, aggregate(&vals)?))
                })
                .collect::<Result<_>>()?;
            report.rows.push(ReportRow {
                dataset: ds.name.clone(),
                sampler: spec.kind,
                spec: *spec,
                scores,
            });
        }
    }
    if let Some(out) = &config.output {
        emit(&report, out.format, &out.path)?;
    }
    Ok(report)
}
