//! Stein's unbiased risk estimate for decomposable graphical models.
//!
//! The graphical differential operator `∇` differentiates with respect to
//! the free entries of the incomplete statistic: `∂/∂S_ii` on the diagonal,
//! `½ ∂/∂S_ij` on off-diagonal edges and zero elsewhere. For a block inverse
//! the trace has the closed form
//! `Tr(∇ S^{-1}) = -½ Tr(S^{-2}) - ½ Tr²(S^{-1})`, and every quantity below is
//! assembled from those per-block traces.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::BlockInverses;
use crate::linalg::SymMatrix;
use crate::models::{substream, GroundTruth};
use crate::stats::SufficientStats;
use crate::summary::mean_and_stderr;

/// `Tr(S^{-2}) + Tr²(S^{-1})` from an already inverted block.
fn inverse_trace_sum(inv: &SymMatrix) -> f64 {
    let t = inv.trace();
    inv.frobenius_norm_sq() + t * t
}

/// `Tr(∇ B^{-1}) = -½ (Tr(B^{-2}) + Tr²(B^{-1}))` for an SPD block.
pub fn nabla_trace_inverse(block: &SymMatrix) -> Result<f64> {
    let inv = block.inverse_spd()?;
    Ok(-0.5 * inverse_trace_sum(&inv))
}

/// Analytic against numeric trace of `∇H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NablaReport {
    pub analytic: f64,
    pub numeric: f64,
    pub abs_err: f64,
    pub rel_err: f64,
}

impl NablaReport {
    pub fn new(analytic: f64, numeric: f64) -> Self {
        let abs_err = (analytic - numeric).abs();
        let scale = analytic.abs().max(numeric.abs());
        let rel_err = if scale > 0.0 { abs_err / scale } else { 0.0 };
        NablaReport {
            analytic,
            numeric,
            abs_err,
            rel_err,
        }
    }
}

/// Default relative step for [`numeric_nabla_trace`].
pub const DEFAULT_STEP: f64 = 1e-5;

/// Central-difference approximation of `Tr(∇H(S))`.
///
/// Each unordered edge `{i, j}` is one variable: both stored positions move
/// together by `h = step * (1 + |S_ij|)`. Diagonal entries contribute
/// `∂H_ii/∂S_ii`; an off-diagonal edge contributes
/// `½ (∂H_ij/∂S_ij + ∂H_ji/∂S_ij)`. Differences at `h` and `h/2` are
/// Richardson-extrapolated, so the truncation error is `O(h⁴)`.
pub fn numeric_nabla_trace<F>(h: F, stats: &SufficientStats, step: f64) -> Result<f64>
where
    F: Fn(&SufficientStats) -> Result<SymMatrix>,
{
    if !(step > 0.0) {
        return Err(Error::InvalidConfig("finite-difference step must be positive".into()));
    }
    let mut total = 0.0;
    for (i, j) in stats.graph().edges() {
        let value = stats.entry(i, j).expect("edge entries are stored");
        let dh = step * (1.0 + value.abs());
        let coarse = central_difference(&h, stats, i, j, dh)?;
        let fine = central_difference(&h, stats, i, j, 0.5 * dh)?;
        total += (4.0 * fine - coarse) / 3.0;
    }
    Ok(total)
}

fn central_difference<F>(h: &F, stats: &SufficientStats, i: usize, j: usize, dh: f64) -> Result<f64>
where
    F: Fn(&SufficientStats) -> Result<SymMatrix>,
{
    let plus = h(&stats.perturbed(i, j, dh)?)?;
    let minus = h(&stats.perturbed(i, j, -dh)?)?;
    let deriv = |a: usize, b: usize| (plus.get(a, b) - minus.get(a, b)) / (2.0 * dh);
    Ok(if i == j { deriv(i, i) } else { 0.5 * (deriv(i, j) + deriv(j, i)) })
}

/// Per-block trace sums `a_k = Tr(S_k^{-2}) + Tr²(S_k^{-1})` and
/// `b_k = Tr(S_[k]^{-2}) + Tr²(S_[k]^{-1})`.
#[derive(Debug, Clone)]
struct TraceSums {
    cliques: Vec<f64>,
    separators: Vec<f64>,
}

impl TraceSums {
    fn new(inv: &BlockInverses<'_>) -> Self {
        TraceSums {
            cliques: inv.cliques().iter().map(inverse_trace_sum).collect(),
            separators: inv.separators().iter().map(inverse_trace_sum).collect(),
        }
    }

    /// `Tr(∇ (Σ_k [α_k S_k^{-1}]^0 - Σ_k [β_k S_[k]^{-1}]^0))`.
    fn nabla_of_clique_sum(&self, alpha: impl Fn(usize) -> f64, beta: impl Fn(usize) -> f64) -> f64 {
        let c: f64 = self.cliques.iter().enumerate().map(|(k, a)| alpha(k) * a).sum();
        let s: f64 = self.separators.iter().enumerate().map(|(k, b)| beta(k) * b).sum();
        -0.5 * (c - s)
    }
}

/// `Tr(∇D)` with `D = Σ_k [S_k^{-1}]^0 - Σ_k [S_[k]^{-1}]^0`.
pub fn nabla_trace_d(inv: &BlockInverses<'_>) -> f64 {
    TraceSums::new(inv).nabla_of_clique_sum(|_| 1.0, |_| 1.0)
}

/// SURE-optimal `d = -2 Tr(∇D) / ‖D‖²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DTuning {
    pub d: f64,
    /// `Σ_k a_k - Σ_k b_k`.
    pub numerator: f64,
    /// `‖D‖²`.
    pub denominator: f64,
}

impl DTuning {
    pub fn from_inverses(inv: &BlockInverses<'_>) -> Self {
        let sums = TraceSums::new(inv);
        let numerator = sums.cliques.iter().sum::<f64>() - sums.separators.iter().sum::<f64>();
        let denominator = inv.d_matrix().frobenius_norm_sq();
        DTuning {
            d: numerator / denominator,
            numerator,
            denominator,
        }
    }
}

pub fn compute_d(stats: &SufficientStats) -> Result<DTuning> {
    Ok(DTuning::from_inverses(&BlockInverses::new(stats)?))
}

/// SURE objective of `K̂_d`: `‖K̂_d‖² - 2 Tr(K̂_d K̂_MVUE) - 4 Tr(∇K̂_d)`.
///
/// This is the risk `E‖K̂_d - K‖²` up to the additive constant `‖K‖²`,
/// which does not depend on `d`.
pub fn sure_risk_proxy(coeff_d: f64, stats: &SufficientStats) -> Result<f64> {
    let inv = BlockInverses::new(stats)?;
    Ok(risk_proxy_from(&inv, coeff_d))
}

fn risk_proxy_from(inv: &BlockInverses<'_>, coeff_d: f64) -> f64 {
    let stats = inv.stats();
    let graph = stats.graph();
    let n = stats.n() as f64;
    let kd = inv.family_matrix(coeff_d);
    let mvue = inv.mvue_matrix();
    let nabla = TraceSums::new(inv).nabla_of_clique_sum(
        |k| n - graph.clique(k).len() as f64 - 1.0 - coeff_d,
        |k| n - graph.separators()[k].len() as f64 - 1.0 - coeff_d,
    );
    kd.frobenius_norm_sq() - 2.0 * kd.trace_product(&mvue) - 4.0 * nabla
}

/// Pathwise integrand `-‖H‖² - 4 Tr(∇H)` for `H = K̂_MVUE - K̂_MLE`, whose
/// expectation is `MSE(MVUE) - MSE(MLE)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominanceGap {
    pub gap: f64,
    pub trace_nabla_h: f64,
}

pub fn dominance_gap_mle(stats: &SufficientStats) -> Result<DominanceGap> {
    let inv = BlockInverses::new(stats)?;
    Ok(dominance_gap_from(&inv))
}

pub(crate) fn dominance_gap_from(inv: &BlockInverses<'_>) -> DominanceGap {
    let graph = inv.stats().graph();
    let cliques: Vec<f64> = graph.cliques().iter().map(|c| -(c.len() as f64 + 1.0)).collect();
    let seps: Vec<f64> = graph.separators().iter().map(|s| -(s.len() as f64 + 1.0)).collect();
    let h = inv.clique_sum(&cliques, &seps).expect("coefficient lengths match");
    let trace_nabla_h = TraceSums::new(inv).nabla_of_clique_sum(|k| cliques[k], |k| seps[k]);
    DominanceGap {
        gap: -h.frobenius_norm_sq() - 4.0 * trace_nabla_h,
        trace_nabla_h,
    }
}

/// Pathwise integrand `p / Tr²(S̄) + 4 Tr(∇ I/Tr(S̄)) = -3p / Tr²(S̄)`, whose
/// expectation is `MSE(BE) - MSE(MVUE)`.
pub fn dominance_gap_be(stats: &SufficientStats) -> Result<f64> {
    let t = stats.diag_trace();
    if !(t > 0.0) {
        return Err(Error::ZeroTrace);
    }
    let p = stats.p() as f64;
    Ok(p / (t * t) + 4.0 * (-p / (t * t)))
}

/// Trace inequalities between a clique block and its separator sub-block:
/// `(Tr(S_k^{-1}) >= Tr(S_[k]^{-1}), Tr(S_k^{-2}) >= Tr(S_[k]^{-2}))`.
/// `sep` holds positions within the block.
pub fn appendix_c_check(block: &SymMatrix, sep: &[usize]) -> Result<(bool, bool)> {
    if let Some(&bad) = sep.iter().find(|&&i| i >= block.dim()) {
        return Err(Error::BadIndex {
            index: bad + 1,
            p: block.dim(),
        });
    }
    let inv = block.inverse_spd()?;
    if sep.is_empty() {
        return Ok((true, true));
    }
    let sep_inv = block.submatrix(sep).inverse_spd()?;
    Ok((
        inv.trace() >= sep_inv.trace(),
        inv.frobenius_norm_sq() >= sep_inv.frobenius_norm_sq(),
    ))
}

/// Monte Carlo comparison of `E Tr(H K)` with `E Tr(H K̂_MVUE + 2∇H)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SureCheckEntry {
    pub function: String,
    pub lhs_mean: f64,
    pub lhs_stderr: f64,
    pub rhs_mean: f64,
    pub rhs_stderr: f64,
    /// `sqrt(lhs_stderr² + rhs_stderr²)`.
    pub combined_stderr: f64,
    /// `|lhs_mean - rhs_mean| / combined_stderr`.
    pub z: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SureCheckReport {
    pub model: String,
    pub p: usize,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub sigma_threshold: f64,
    pub entries: Vec<SureCheckEntry>,
}

impl SureCheckReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }
}

/// Test functions used by [`sure_identity_check`].
pub const SURE_FUNCTIONS: [&str; 3] = ["I/Tr(S)", "D", "K_MLE"];

/// Runs the SURE identity for `H ∈ {I/Tr(S), D, K̂_MLE}` over `trials`
/// independent samples of size `n`, passing each at 4 combined standard
/// errors.
pub fn sure_identity_check(truth: &GroundTruth, n: usize, trials: usize, seed: u64) -> Result<SureCheckReport> {
    if trials < 2 {
        return Err(Error::InvalidConfig("need at least 2 trials".into()));
    }
    let required = truth.graph.max_clique_size();
    if n < required {
        return Err(Error::TooFewSamples { n, required });
    }
    let sampler = truth.sampler()?;
    let p = truth.p();
    let k = &truth.k_true;
    let rows: Vec<[f64; 6]> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<[f64; 6]> {
            let mut rng = substream(seed, &[n as u64, t as u64]);
            let data = sampler.sample(n, &mut rng);
            let stats = SufficientStats::from_data(&data, truth.graph.clone())?;
            let inv = BlockInverses::new(&stats)?;
            let mvue = inv.mvue_matrix();
            let d = inv.d_matrix();
            let nabla_d = nabla_trace_d(&inv);
            let tr = stats.diag_trace();
            let nf = n as f64;
            let mle = &d * nf;
            Ok([
                k.trace() / tr,
                mvue.trace() / tr + 2.0 * (-(p as f64) / (tr * tr)),
                d.trace_product(k),
                d.trace_product(&mvue) + 2.0 * nabla_d,
                mle.trace_product(k),
                mle.trace_product(&mvue) + 2.0 * nf * nabla_d,
            ])
        })
        .collect::<Result<_>>()?;

    let column = |c: usize| rows.iter().map(|r| r[c]).collect::<Vec<_>>();
    let sigma_threshold = 4.0;
    let entries = SURE_FUNCTIONS
        .iter()
        .enumerate()
        .map(|(f, name)| {
            let (lhs_mean, lhs_stderr) = mean_and_stderr(&column(2 * f));
            let (rhs_mean, rhs_stderr) = mean_and_stderr(&column(2 * f + 1));
            let combined_stderr = lhs_stderr.hypot(rhs_stderr);
            let z = (lhs_mean - rhs_mean).abs() / combined_stderr;
            SureCheckEntry {
                function: name.to_string(),
                lhs_mean,
                lhs_stderr,
                rhs_mean,
                rhs_stderr,
                combined_stderr,
                z,
                pass: z <= sigma_threshold,
            }
        })
        .collect();
    Ok(SureCheckReport {
        model: truth.label.clone(),
        p,
        n,
        trials,
        seed,
        sigma_threshold,
        entries,
    })
}
