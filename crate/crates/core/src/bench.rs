//! Monte Carlo benchmark: normalized MSE `‖K̂ - K‖² / ‖K‖²` of each
//! estimator over a grid of sample sizes.
//!
//! Trial `t` at sample size `n` draws its data from
//! `substream(master_seed, [n, t])`, so every grid point is reproducible on
//! its own and results do not depend on the number of worker threads.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{Adjustment, BlockInverses, ConcentrationEstimate, Method, PsdStatus};
use crate::linalg::SymMatrix;
use crate::models::{make_model, substream, GaussianSampler, GroundTruth, ModelSpec};
use crate::projection::{positive_part, project_to_pattern_psd, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::stats::SufficientStats;
use crate::summary::mean_and_stderr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EstimatorKind {
    Mle,
    Mvue,
    Be,
    SureD,
    /// `K̂ = 0`, the trivial baseline with normalized MSE exactly 1.
    Zero,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 5] = [
        EstimatorKind::Mle,
        EstimatorKind::Mvue,
        EstimatorKind::Be,
        EstimatorKind::SureD,
        EstimatorKind::Zero,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            EstimatorKind::Mle => "MLE",
            EstimatorKind::Mvue => "MVUE",
            EstimatorKind::Be => "BE",
            EstimatorKind::SureD => "SURE_D",
            EstimatorKind::Zero => "ZERO",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.tag().eq_ignore_ascii_case(tag))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown estimator '{tag}'")))
    }
}

fn default_true() -> bool {
    true
}

fn default_estimators() -> Vec<EstimatorKind> {
    EstimatorKind::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub model: ModelSpec,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<EstimatorKind>,
    pub master_seed: u64,
    /// Replace an estimate that fails the PSD check by its positive part.
    #[serde(default = "default_true")]
    pub positive_part_fallback: bool,
    /// Use the pattern-preserving projection instead of plain clipping
    /// when the fallback triggers.
    #[serde(default)]
    pub full_projection: bool,
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.n_grid.is_empty() || self.n_grid.contains(&0) {
            return Err(Error::InvalidConfig("n_grid must be non-empty with values >= 1".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::InvalidConfig("no estimators selected".into()));
        }
        Ok(())
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: BenchConfig = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }
}

/// One aggregated grid point. Rows tagged `<EST>_RAW` hold the unadjusted
/// normalized MSE of an estimator whose PSD fallback fired at least once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub model: String,
    pub estimator: String,
    pub n: usize,
    /// Trials that produced an estimate.
    pub trials: usize,
    pub nmse_mean: f64,
    pub nmse_stderr: f64,
    pub psd_failure_rate: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub rows: Vec<BenchRow>,
}

impl BenchResult {
    pub fn row(&self, estimator: &str, n: usize) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.estimator == estimator && r.n == n)
    }
}

/// An estimator that produced no estimate in one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub estimator: String,
    pub n: usize,
    pub trial: usize,
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, Copy)]
struct Outcome {
    nmse: f64,
    raw_nmse: f64,
    not_psd: bool,
    adjusted: bool,
}

type TrialResult = Vec<std::result::Result<Outcome, (&'static str, String)>>;

fn nmse(est: &SymMatrix, truth: &SymMatrix, truth_norm_sq: f64) -> f64 {
    (est - truth).frobenius_norm_sq() / truth_norm_sq
}

fn raw_estimate(kind: EstimatorKind, inv: &BlockInverses<'_>) -> Result<ConcentrationEstimate> {
    let est = match kind {
        EstimatorKind::Mle => inv.mle()?,
        EstimatorKind::Mvue => inv.mvue()?,
        EstimatorKind::Be => inv.be()?,
        EstimatorKind::SureD => inv.sure_tuned()?,
        EstimatorKind::Zero => unreachable!("zero estimator is handled separately"),
    };
    // The MLE's status is a structural guarantee; check it like the others.
    Ok(ConcentrationEstimate {
        psd: PsdStatus::check(&est.matrix),
        ..est
    })
}

struct Setup<'a> {
    config: &'a BenchConfig,
    truth: &'a GroundTruth,
    sampler: &'a GaussianSampler,
    truth_norm_sq: f64,
}

fn run_trial(setup: &Setup<'_>, n: usize, trial: usize) -> TrialResult {
    let Setup {
        config,
        truth,
        sampler,
        truth_norm_sq,
    } = *setup;
    let fail = |e: &Error| (e.code(), e.to_string());
    let mut rng = substream(config.master_seed, &[n as u64, trial as u64]);
    let data = sampler.sample(n, &mut rng);
    let stats = match SufficientStats::from_data(&data, truth.graph.clone()) {
        Ok(s) => s,
        Err(e) => return config.estimators.iter().map(|_| Err(fail(&e))).collect(),
    };
    let inverses = BlockInverses::new(&stats);
    config
        .estimators
        .iter()
        .map(|&kind| {
            if kind == EstimatorKind::Zero {
                let v = nmse(&SymMatrix::zeros(truth.p()), &truth.k_true, truth_norm_sq);
                return Ok(Outcome {
                    nmse: v,
                    raw_nmse: v,
                    not_psd: false,
                    adjusted: false,
                });
            }
            let inv = inverses.as_ref().map_err(fail)?;
            let est = raw_estimate(kind, inv).map_err(|e| fail(&e))?;
            let raw_nmse = nmse(&est.matrix, &truth.k_true, truth_norm_sq);
            let not_psd = est.psd == PsdStatus::VerifiedNotPsd;
            if !(not_psd && config.positive_part_fallback) {
                return Ok(Outcome {
                    nmse: raw_nmse,
                    raw_nmse,
                    not_psd,
                    adjusted: false,
                });
            }
            let fixed = if config.full_projection {
                project_to_pattern_psd(&est, &truth.graph, DEFAULT_TOL, DEFAULT_MAX_ITER).map(|(e, _)| e)
            } else {
                positive_part(&est, &truth.graph)
            }
            .map_err(|e| fail(&e))?;
            debug_assert_ne!(fixed.adjustment, Adjustment::None);
            Ok(Outcome {
                nmse: nmse(&fixed.matrix, &truth.k_true, truth_norm_sq),
                raw_nmse,
                not_psd,
                adjusted: true,
            })
        })
        .collect()
}

/// Runs the benchmark, returning the aggregated rows and every per-trial
/// estimator failure.
pub fn run_benchmark_detailed(config: &BenchConfig) -> Result<(BenchResult, Vec<TrialFailure>)> {
    config.validate()?;
    let truth = make_model(&config.model)?;
    let sampler = truth.sampler()?;
    let setup = Setup {
        config,
        truth: &truth,
        sampler: &sampler,
        truth_norm_sq: truth.k_true.frobenius_norm_sq(),
    };
    let max_clique = truth.graph.max_clique_size();
    let label = truth.label.clone();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &n in &config.n_grid {
        if n < max_clique {
            log::info!("skipping n = {n}: estimators need n >= {max_clique}");
            continue;
        }
        let trials: Vec<TrialResult> = (0..config.trials)
            .into_par_iter()
            .map(|t| run_trial(&setup, n, t))
            .collect();
        for (e, &kind) in config.estimators.iter().enumerate() {
            let mut ok = Vec::with_capacity(trials.len());
            for (t, trial) in trials.iter().enumerate() {
                match &trial[e] {
                    Ok(o) => ok.push(*o),
                    Err((code, message)) => failures.push(TrialFailure {
                        estimator: kind.tag().to_string(),
                        n,
                        trial: t,
                        code: code.to_string(),
                        message: message.clone(),
                    }),
                }
            }
            if ok.is_empty() {
                continue;
            }
            let count = ok.len();
            let psd_failure_rate = ok.iter().filter(|o| o.not_psd).count() as f64 / count as f64;
            let row = |estimator: String, values: Vec<f64>| {
                let (nmse_mean, nmse_stderr) = mean_and_stderr(&values);
                BenchRow {
                    model: label.clone(),
                    estimator,
                    n,
                    trials: count,
                    nmse_mean,
                    nmse_stderr,
                    psd_failure_rate,
                }
            };
            rows.push(row(kind.tag().to_string(), ok.iter().map(|o| o.nmse).collect()));
            if ok.iter().any(|o| o.adjusted) {
                rows.push(row(format!("{}_RAW", kind.tag()), ok.iter().map(|o| o.raw_nmse).collect()));
            }
        }
    }
    Ok((BenchResult { rows }, failures))
}

/// [`run_benchmark_detailed`] with per-trial failures logged as warnings.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchResult> {
    let (result, failures) = run_benchmark_detailed(config)?;
    for f in &failures {
        log::warn!("{} failed at n = {}, trial {}: {}", f.estimator, f.n, f.trial, f.message);
    }
    Ok(result)
}

pub const CSV_HEADER: [&str; 7] = [
    "model",
    "estimator",
    "n",
    "trials",
    "nmse_mean",
    "nmse_stderr",
    "psd_failure_rate",
];

pub fn write_results_to<W: std::io::Write>(result: &BenchResult, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for row in &result.rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_results(result: &BenchResult, path: impl AsRef<Path>) -> Result<()> {
    write_results_to(result, std::fs::File::create(path)?)
}

pub fn read_results_from<R: std::io::Read>(reader: R) -> Result<BenchResult> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::Parse(format!("unexpected results header {header:?}")));
    }
    let rows = r.deserialize().collect::<std::result::Result<Vec<BenchRow>, _>>()?;
    Ok(BenchResult { rows })
}

pub fn read_results(path: impl AsRef<Path>) -> Result<BenchResult> {
    read_results_from(std::fs::File::open(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub n: usize,
    pub nmse: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSeries {
    pub model: String,
    pub estimator: String,
    pub points: Vec<PlotPoint>,
}

/// Plot layout: `{"series": [{"model", "estimator", "points": [{"n", "nmse", "stderr"}]}]}`,
/// one series per (model, estimator) with points sorted by `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub series: Vec<PlotSeries>,
}

impl From<&BenchResult> for PlotData {
    fn from(result: &BenchResult) -> Self {
        let mut grouped: BTreeMap<(String, String), Vec<PlotPoint>> = BTreeMap::new();
        for row in &result.rows {
            grouped
                .entry((row.model.clone(), row.estimator.clone()))
                .or_default()
                .push(PlotPoint {
                    n: row.n,
                    nmse: row.nmse_mean,
                    stderr: row.nmse_stderr,
                });
        }
        let series = grouped
            .into_iter()
            .map(|((model, estimator), mut points)| {
                points.sort_by_key(|p| p.n);
                PlotSeries {
                    model,
                    estimator,
                    points,
                }
            })
            .collect();
        PlotData { series }
    }
}

pub fn emit_plot_data(result: &BenchResult, path: impl AsRef<Path>) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(file, &PlotData::from(result))?;
    Ok(())
}

/// Method tag of an estimate, matching [`EstimatorKind::tag`].
pub fn method_kind(method: &Method) -> EstimatorKind {
    match method {
        Method::Mle => EstimatorKind::Mle,
        Method::Mvue => EstimatorKind::Mvue,
        Method::Be => EstimatorKind::Be,
        Method::SureD { .. } => EstimatorKind::SureD,
    }
}
