//! Evaluation metrics and the repeated-run experiment harnesses.

use std::time::Instant;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::builder::build_forest;
use crate::error::{Error, Result};
use crate::model::{Dataset, RiForestParams, SplitStrategy};
use crate::scoring::score_dataset;
use crate::seed;

/// Area under the ROC curve as the Mann-Whitney statistic: the probability that a
/// random anomaly (label 1) outscores a random normal sample, ties counting one half.
pub fn auroc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: scores.len(),
            found: labels.len(),
        });
    }
    let positives = labels.iter().filter(|&&l| l == 1).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Sum of (1-based, tie-averaged) ranks of the positives.
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let avg_rank = (start + 1 + end) as f64 / 2.0;
        let tied_pos = order[start..end].iter().filter(|&&i| labels[i] == 1).count();
        rank_sum += avg_rank * tied_pos as f64;
        start = end;
    }
    let p = positives as f64;
    let u = rank_sum - p * (p + 1.0) / 2.0;
    Ok(u / (p * negatives as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ImprovementMode {
    /// `(auroc - mean) / mean * 100`.
    #[default]
    Ratio,
    /// `(auroc - mean) * 100`.
    Difference,
}

pub fn improvement_rate(auroc_m: f64, mean_auroc: f64, mode: ImprovementMode) -> Result<f64> {
    if mean_auroc.is_nan() || mean_auroc <= 0.0 {
        return Err(Error::NonPositiveMean(mean_auroc));
    }
    Ok(match mode {
        ImprovementMode::Ratio => (auroc_m - mean_auroc) / mean_auroc * 100.0,
        ImprovementMode::Difference => (auroc_m - mean_auroc) * 100.0,
    })
}

/// Sample standard deviation (n - 1) over the mean.
pub fn coefficient_of_variation(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::DegenerateInput(
            "coefficient of variation needs at least two values".into(),
        ));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if mean.is_nan() || mean <= 0.0 {
        return Err(Error::NonPositiveMean(mean));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(var.sqrt() / mean)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkResult {
    pub per_run_auroc: Vec<f64>,
    pub mean_auroc: f64,
    /// Absent for a single run.
    pub cv: Option<f64>,
    pub wall_time_seconds: f64,
}

impl BenchmarkResult {
    fn from_runs(per_run_auroc: Vec<f64>, wall_time_seconds: f64) -> Self {
        let mean_auroc = per_run_auroc.iter().sum::<f64>() / per_run_auroc.len() as f64;
        let cv = coefficient_of_variation(&per_run_auroc).ok();
        Self {
            per_run_auroc,
            mean_auroc,
            cv,
            wall_time_seconds,
        }
    }
}

/// Seed used by repetition `run` of an experiment seeded with `master_seed`.
pub fn run_seed(master_seed: u64, run: usize) -> u64 {
    seed::derive_seed(master_seed, seed::RUN_STREAM, run as u64)
}

fn require_labels(data: &Dataset) -> Result<&[u8]> {
    data.labels().ok_or(Error::Unlabeled)
}

fn benchmark_with<F>(
    data: &Dataset,
    params: &RiForestParams,
    repeats: usize,
    prepare: F,
) -> Result<BenchmarkResult>
where
    F: Fn(&Dataset, u64) -> Result<Option<Dataset>> + Sync,
{
    let labels = require_labels(data)?;
    if repeats == 0 {
        return Err(Error::InvalidParam {
            field: "repeats",
            reason: "must be at least 1".into(),
        });
    }
    let started = Instant::now();
    let per_run = (0..repeats)
        .into_par_iter()
        .map(|run| {
            let seed = run_seed(params.master_seed, run);
            let run_params = RiForestParams {
                master_seed: seed,
                ..params.clone()
            };
            let prepared = prepare(data, seed)?;
            let train = prepared.as_ref().unwrap_or(data);
            let forest = build_forest(train, &run_params)?;
            let report = score_dataset(train, &forest)?;
            auroc(&report.scores, labels)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(BenchmarkResult::from_runs(
        per_run,
        started.elapsed().as_secs_f64(),
    ))
}

/// Fits and scores the labeled data `repeats` times with per-run seeds derived
/// from `params.master_seed`, reporting per-run AUROC, mean and CV.
pub fn repeated_benchmark(
    data: &Dataset,
    params: &RiForestParams,
    repeats: usize,
) -> Result<BenchmarkResult> {
    benchmark_with(data, params, repeats, |_, _| Ok(None))
}

/// Appends `count` standard-normal columns drawn from the run seed.
pub fn append_noise_columns(data: &Dataset, count: usize, run_seed: u64) -> Result<Dataset> {
    let mut rng = seed::stream(run_seed, seed::NOISE_STREAM, 0);
    data.with_extra_columns(count, |_, _| StandardNormal.sample(&mut rng))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSweepResult {
    pub noise_counts: Vec<usize>,
    pub mean_auroc_per_count: Vec<f64>,
    pub repeats: usize,
    pub results: Vec<BenchmarkResult>,
}

/// For each noise count, appends that many fresh N(0,1) columns per repetition
/// (before standardization) and runs the repeated benchmark.
pub fn noise_robustness(
    data: &Dataset,
    params: &RiForestParams,
    noise_counts: &[usize],
    repeats: usize,
) -> Result<NoiseSweepResult> {
    require_labels(data)?;
    let results = noise_counts
        .iter()
        .map(|&count| {
            benchmark_with(data, params, repeats, |d, seed| {
                if count == 0 {
                    Ok(None)
                } else {
                    append_noise_columns(d, count, seed).map(Some)
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NoiseSweepResult {
        noise_counts: noise_counts.to_vec(),
        mean_auroc_per_count: results.iter().map(|r| r.mean_auroc).collect(),
        repeats,
        results,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AblationVariant {
    WithoutPathLength,
    WithoutRandomHyperplanes,
    RandomSplit,
    BlankSplit,
    Full,
}

impl AblationVariant {
    pub const ALL: [AblationVariant; 5] = [
        Self::WithoutPathLength,
        Self::WithoutRandomHyperplanes,
        Self::RandomSplit,
        Self::BlankSplit,
        Self::Full,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Self::WithoutPathLength => "w/o pl",
            Self::WithoutRandomHyperplanes => "w/o RH",
            Self::RandomSplit => "w/ RS",
            Self::BlankSplit => "w/ BS",
            Self::Full => "RiForest",
        }
    }

    /// The variant's configuration derived from the full-model params.
    pub fn configure(self, base: &RiForestParams) -> RiForestParams {
        let mut p = base.clone();
        match self {
            Self::WithoutPathLength => p.use_path_length = false,
            Self::WithoutRandomHyperplanes => p.use_random_hyperplanes = false,
            Self::RandomSplit => p.split_strategy = SplitStrategy::Random,
            Self::BlankSplit => p.split_strategy = SplitStrategy::Blank,
            Self::Full => {}
        }
        p
    }
}

impl std::fmt::Display for AblationVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationReport {
    pub entries: Vec<(AblationVariant, BenchmarkResult)>,
}

impl AblationReport {
    pub fn get(&self, variant: AblationVariant) -> Option<&BenchmarkResult> {
        self.entries
            .iter()
            .find(|(v, _)| *v == variant)
            .map(|(_, r)| r)
    }

    /// Mean of the variants' mean AUROCs.
    pub fn suite_mean(&self) -> f64 {
        self.entries.iter().map(|(_, r)| r.mean_auroc).sum::<f64>() / self.entries.len() as f64
    }

    pub fn improvement_rate(&self, variant: AblationVariant, mode: ImprovementMode) -> Result<f64> {
        let r = self.get(variant).ok_or(Error::DegenerateInput(format!(
            "variant {variant} missing from report"
        )))?;
        improvement_rate(r.mean_auroc, self.suite_mean(), mode)
    }
}

/// Runs the repeated benchmark for the full model and the four ablations.
pub fn ablation_suite(
    data: &Dataset,
    params: &RiForestParams,
    repeats: usize,
) -> Result<AblationReport> {
    require_labels(data)?;
    let entries = AblationVariant::ALL
        .iter()
        .map(|&v| repeated_benchmark(data, &v.configure(params), repeats).map(|r| (v, r)))
        .collect::<Result<Vec<_>>>()?;
    Ok(AblationReport { entries })
}
