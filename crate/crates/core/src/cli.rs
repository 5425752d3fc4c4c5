//! `ggm` command line.
//!
//! Exit codes: 0 on success, 1 on invalid input or usage, 2 on runtime
//! failures (singular blocks, non-converged projections, I/O).

use std::ffi::OsString;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{emit_plot_data, run_benchmark_detailed, write_results, BenchConfig, EstimatorKind};
use crate::error::{Error, Result};
use crate::estimators::{self, ConcentrationEstimate};
use crate::io::{self, EstimateSidecar, ErrorInfo};
use crate::models::{make_model, substream, ModelKind, ModelSpec};
use crate::projection::{positive_part, project_to_pattern_psd, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::stats::SufficientStats;
use crate::sure::sure_identity_check;

#[derive(Debug, Parser)]
#[command(name = "ggm", version, about = "Concentration matrix estimation on decomposable Gaussian graphical models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that a pattern is chordal and print its clique order.
    GraphCheck(GraphCheckArgs),
    /// Generate a ground-truth model and Gaussian samples from it.
    Simulate(SimulateArgs),
    /// Estimate the concentration matrix from data on a known graph.
    Estimate(EstimateArgs),
    /// Run the Monte Carlo benchmark over a grid of sample sizes.
    Bench(BenchArgs),
    /// Monte Carlo check of the SURE identity on a generated model.
    SureCheck(SureCheckArgs),
}

#[derive(Debug, Args)]
pub struct GraphCheckArgs {
    /// Adjacency pattern: 0/1 CSV, or JSON (matrix or clique list, 1-based).
    #[arg(long)]
    pub pattern: PathBuf,
    /// Write the graph (cliques in perfect order) as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct ModelArgs {
    /// Model kind: block-diagonal, two-coupled-blocks, banded, differential-banded, arrow, multiscale, paper-two-cliques, paper-banded, paper-diffband.
    #[arg(long)]
    pub model: Option<String>,
    /// Dimension (fixed by the paper-* presets).
    #[arg(long)]
    pub p: Option<usize>,
    /// Bandwidth for banded kinds (wide band for differential-banded), block size for block-diagonal.
    #[arg(long)]
    pub band: Option<usize>,
    /// Size of the first clique for two-coupled-blocks.
    #[arg(long)]
    pub first: Option<usize>,
    /// Overlap of the two cliques for two-coupled-blocks.
    #[arg(long)]
    pub overlap: Option<usize>,
    /// Number of hub nodes for arrow.
    #[arg(long)]
    pub hub: Option<usize>,
    /// Smallest eigenvalue of the generated concentration matrix.
    #[arg(long)]
    pub conditioning: Option<f64>,
}

impl ModelArgs {
    fn is_empty(&self) -> bool {
        self.model.is_none()
            && self.p.is_none()
            && self.band.is_none()
            && self.first.is_none()
            && self.overlap.is_none()
            && self.hub.is_none()
            && self.conditioning.is_none()
    }

    pub fn spec(&self, seed: u64) -> Result<ModelSpec> {
        let name = self
            .model
            .as_deref()
            .ok_or_else(|| Error::InvalidConfig("--model is required".into()))?;
        let fixed = ModelKind::from_name(name, 1, None)?.fixed_dimension();
        let p = match (self.p, fixed) {
            (Some(p), Some(f)) if p != f => {
                return Err(Error::InvalidModel(format!("{name} has p = {f}, got --p {p}")));
            }
            (_, Some(f)) => f,
            (Some(p), None) => p,
            (None, None) => return Err(Error::InvalidConfig(format!("--p is required for {name}"))),
        };
        let mut kind = ModelKind::from_name(name, p, self.band)?;
        let unused = |flag: &str| Err(Error::InvalidConfig(format!("{flag} does not apply to {name}")));
        match &mut kind {
            ModelKind::TwoCoupledBlocks { first, overlap } => {
                if self.band.is_some() {
                    return unused("--band");
                }
                *first = self.first.unwrap_or(*first);
                *overlap = self.overlap.unwrap_or(*overlap);
            }
            ModelKind::Arrow { hub } => {
                if self.band.is_some() {
                    return unused("--band");
                }
                *hub = self.hub.unwrap_or(*hub);
            }
            ModelKind::Multiscale | ModelKind::PaperTwoCliques | ModelKind::PaperBanded | ModelKind::PaperDiffband
                if self.band.is_some() =>
            {
                return unused("--band");
            }
            _ => {}
        }
        if !matches!(kind, ModelKind::TwoCoupledBlocks { .. }) {
            if self.first.is_some() {
                return unused("--first");
            }
            if self.overlap.is_some() {
                return unused("--overlap");
            }
        }
        if !matches!(kind, ModelKind::Arrow { .. }) && self.hub.is_some() {
            return unused("--hub");
        }
        let mut spec = ModelSpec::new(kind, p, seed);
        if let Some(c) = self.conditioning {
            spec.conditioning = c;
        }
        Ok(spec)
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Number of samples.
    #[arg(long)]
    pub n: usize,
    /// Seed for both the model entries and the samples.
    #[arg(long)]
    pub seed: u64,
    /// Samples as CSV, one row per sample.
    #[arg(long)]
    pub out_data: PathBuf,
    /// Ground-truth concentration matrix as CSV.
    #[arg(long)]
    pub out_truth: PathBuf,
    /// Graph as JSON (1-based cliques).
    #[arg(long)]
    pub out_graph: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Mle,
    Mvue,
    Be,
    Sure,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Estimator.
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Graph JSON (1-based cliques).
    #[arg(long)]
    pub graph: PathBuf,
    /// Data CSV, one row per sample.
    #[arg(long)]
    pub data: PathBuf,
    /// Clip negative eigenvalues when the estimate is not positive semidefinite.
    #[arg(long, conflicts_with = "project_full")]
    pub positive_part: bool,
    /// Project onto PSD matrices with the graph's zero pattern when the estimate is not PSD.
    #[arg(long)]
    pub project_full: bool,
    /// Convergence tolerance of the full projection.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Iteration limit of the full projection.
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// Estimate CSV; metadata goes to a JSON sidecar next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Benchmark configuration JSON; replaces the inline model and grid flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',')]
    pub n_grid: Vec<usize>,
    /// Trials per sample size.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Master seed; also seeds the model entries unless --model-seed is given.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Seed for the model entries.
    #[arg(long)]
    pub model_seed: Option<u64>,
    /// Comma-separated estimators from MLE, MVUE, BE, SURE_D, ZERO (default all).
    #[arg(long, value_delimiter = ',')]
    pub estimators: Vec<String>,
    /// Keep estimates that fail the PSD check instead of taking their positive part.
    #[arg(long)]
    pub no_fallback: bool,
    /// Use the pattern-preserving projection as the PSD fallback.
    #[arg(long)]
    pub project_full: bool,
    /// Results CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Plot-ready JSON series.
    #[arg(long)]
    pub plot_json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SureCheckArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Sample size per trial.
    #[arg(long)]
    pub n: usize,
    /// Number of trials.
    #[arg(long)]
    pub trials: usize,
    /// Seed for the model entries and the trials.
    #[arg(long)]
    pub seed: u64,
    /// JSON report.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Clap command tree, exposed for documentation checks.
pub fn command() -> clap::Command {
    <Cli as clap::CommandFactory>::command()
}

/// Parses `args` (including the program name) and runs the subcommand,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::GraphCheck(a) => graph_check(a),
        Command::Simulate(a) => simulate(a),
        Command::Estimate(a) => estimate(a),
        Command::Bench(a) => bench(a),
        Command::SureCheck(a) => sure_check(a),
    }
}

fn join(set: &[usize]) -> String {
    let labels: Vec<String> = set.iter().map(usize::to_string).collect();
    format!("{{{}}}", labels.join(","))
}

fn graph_check(a: GraphCheckArgs) -> Result<()> {
    let g = io::read_pattern(&a.pattern)?;
    println!("chordal: yes");
    println!("p: {}", g.p());
    let seps = g.separators_one_based();
    for (k, c) in g.cliques_one_based().iter().enumerate() {
        match k.checked_sub(1).map(|s| &seps[s]) {
            Some(s) => println!("C{} = {}  S{} = {}", k + 1, join(c), k + 1, join(s)),
            None => println!("C{} = {}", k + 1, join(c)),
        }
    }
    let (sum_c, sum_s) = g.cardinality_sums();
    println!("cardinality: sum|C| - sum|S| = {sum_c} - {sum_s} = {} = p", sum_c - sum_s);
    if let Some(out) = a.out {
        io::write_graph_json(&g, out)?;
    }
    Ok(())
}

fn simulate(a: SimulateArgs) -> Result<()> {
    if a.n == 0 {
        return Err(Error::InvalidConfig("--n must be at least 1".into()));
    }
    let spec = a.model.spec(a.seed)?;
    let truth = make_model(&spec)?;
    let mut rng = substream(a.seed, &[a.n as u64]);
    let data = truth.sampler()?.sample(a.n, &mut rng);
    io::write_data_csv(&data, &a.out_data)?;
    io::write_matrix_csv(&truth.k_true, &a.out_truth)?;
    io::write_graph_json(&truth.graph, &a.out_graph)?;
    println!("{}: wrote {} samples of dimension {}", truth.label, a.n, truth.p());
    Ok(())
}

fn raw_estimate(method: MethodArg, stats: &SufficientStats) -> Result<ConcentrationEstimate> {
    match method {
        MethodArg::Mle => estimators::mle(stats),
        MethodArg::Mvue => estimators::mvue(stats),
        MethodArg::Be => estimators::be(stats),
        MethodArg::Sure => estimators::sure_tuned(stats),
    }
}

fn estimate(a: EstimateArgs) -> Result<()> {
    if a.project_full && !(a.tol > 0.0) {
        return Err(Error::InvalidConfig("--tol must be positive".into()));
    }
    if a.project_full && a.max_iter == 0 {
        return Err(Error::InvalidConfig("--max-iter must be at least 1".into()));
    }
    let graph = Arc::new(io::read_graph_json(&a.graph)?);
    let data = io::read_data_csv(&a.data)?;
    let stats = SufficientStats::from_data(&data, Arc::clone(&graph))?;
    let (n, p) = (stats.n(), stats.p());
    if a.method == MethodArg::Mvue && n <= p + 1 {
        eprintln!("warning: n = {n} <= p + 1; the MVUE is not guaranteed positive definite");
    }
    let raw = raw_estimate(a.method, &stats)?;
    let not_psd = raw.psd == estimators::PsdStatus::VerifiedNotPsd;
    let (est, projection) = if not_psd && a.positive_part {
        (positive_part(&raw, &graph)?, None)
    } else if not_psd && a.project_full {
        match project_to_pattern_psd(&raw, &graph, a.tol, a.max_iter) {
            Ok((est, report)) => (est, Some(report)),
            Err(err @ Error::NotConverged { .. }) => {
                // Keep the last iterate so the caller can inspect it.
                if let Error::NotConverged { best, .. } = &err {
                    let (est, report) = &**best;
                    let mut sidecar = EstimateSidecar::new(est);
                    sidecar.projection = Some(report.clone());
                    sidecar.error = Some(ErrorInfo::from(&err));
                    io::write_estimate(&a.out, est, &sidecar)?;
                }
                return Err(err);
            }
            Err(e) => return Err(e),
        }
    } else {
        (raw, None)
    };
    let mut sidecar = EstimateSidecar::new(&est);
    sidecar.projection = projection;
    let side = io::write_estimate(&a.out, &est, &sidecar)?;
    println!(
        "{} estimate (n = {n}, p = {p}) written to {} and {}",
        est.method.tag(),
        a.out.display(),
        side.display()
    );
    Ok(())
}

fn bench_config(a: &BenchArgs) -> Result<BenchConfig> {
    if let Some(path) = &a.config {
        let inline = !a.model.is_empty()
            || !a.n_grid.is_empty()
            || a.trials.is_some()
            || a.seed.is_some()
            || a.model_seed.is_some()
            || !a.estimators.is_empty()
            || a.no_fallback
            || a.project_full;
        if inline {
            return Err(Error::InvalidConfig("--config cannot be combined with inline benchmark flags".into()));
        }
        return BenchConfig::from_json_file(path);
    }
    let seed = a.seed.ok_or_else(|| Error::InvalidConfig("--seed is required".into()))?;
    let trials = a.trials.ok_or_else(|| Error::InvalidConfig("--trials is required".into()))?;
    if a.n_grid.is_empty() {
        return Err(Error::InvalidConfig("--n-grid is required".into()));
    }
    let estimators = if a.estimators.is_empty() {
        EstimatorKind::ALL.to_vec()
    } else {
        a.estimators
            .iter()
            .map(|t| EstimatorKind::from_tag(t.trim()))
            .collect::<Result<_>>()?
    };
    let config = BenchConfig {
        model: a.model.spec(a.model_seed.unwrap_or(seed))?,
        n_grid: a.n_grid.clone(),
        trials,
        estimators,
        master_seed: seed,
        positive_part_fallback: !a.no_fallback,
        full_projection: a.project_full,
    };
    config.validate()?;
    Ok(config)
}

fn bench(a: BenchArgs) -> Result<()> {
    let config = bench_config(&a)?;
    let (result, failures) = run_benchmark_detailed(&config)?;
    for f in &failures {
        eprintln!("warning: {} failed at n = {}, trial {}: {}", f.estimator, f.n, f.trial, f.message);
    }
    write_results(&result, &a.out)?;
    if let Some(plot) = &a.plot_json {
        emit_plot_data(&result, plot)?;
    }
    for row in &result.rows {
        println!(
            "{:<10} n = {:<5} nmse = {:.6} ± {:.6}  psd failures = {:.3}",
            row.estimator, row.n, row.nmse_mean, row.nmse_stderr, row.psd_failure_rate
        );
    }
    Ok(())
}

fn sure_check(a: SureCheckArgs) -> Result<()> {
    let truth = make_model(&a.model.spec(a.seed)?)?;
    let report = sure_identity_check(&truth, a.n, a.trials, a.seed)?;
    for e in &report.entries {
        println!(
            "{:<8} E Tr(HK) = {:.6} ± {:.6}  E Tr(H K_MVUE + 2 ∇H) = {:.6} ± {:.6}  z = {:.2}  {}",
            e.function,
            e.lhs_mean,
            e.lhs_stderr,
            e.rhs_mean,
            e.rhs_stderr,
            e.z,
            if e.pass { "pass" } else { "FAIL" }
        );
    }
    if let Some(path) = &a.report {
        io::write_json(&report, path)?;
    }
    Ok(())
}

/// Convenience for tests and examples: runs `ggm` with string arguments.
pub fn run_str(args: &[&str]) -> i32 {
    run(std::iter::once("ggm").chain(args.iter().copied()))
}
