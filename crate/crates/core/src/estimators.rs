//! Closed-form concentration estimators.
//!
//! Every estimator here has the form
//! `Σ_k [α_k S_k^{-1}]^0 - Σ_k [β_k S_[k]^{-1}]^0` for per-block
//! coefficients, so they all go through [`BlockInverses::clique_sum`]:
//!
//! | estimator | α_k            | β_k            |
//! |-----------|----------------|----------------|
//! | MLE       | n              | n              |
//! | MVUE      | n - c_k - 1    | n - s_k - 1    |
//! | K̂_d      | n - c_k - 1 - d | n - s_k - 1 - d |
//!
//! The biased estimator (BE) subtracts `I / Tr(S̄)` from the MVUE.

use serde::{Deserialize, Serialize};

use crate::error::{BlockKind, Error, Result};
use crate::linalg::SymMatrix;
use crate::stats::SufficientStats;
use crate::sure;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    Mle,
    Mvue,
    Be,
    SureD { d: f64 },
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::Mle => "MLE",
            Method::Mvue => "MVUE",
            Method::Be => "BE",
            Method::SureD { .. } => "SURE_D",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsdStatus {
    VerifiedPd,
    /// Positive semidefinite by construction, possibly singular.
    VerifiedPsd,
    VerifiedNotPsd,
    Unchecked,
}

impl PsdStatus {
    /// Eigenvalue check: positive minimum eigenvalue means positive definite.
    pub fn check(m: &SymMatrix) -> PsdStatus {
        match m.min_eigenvalue() {
            Ok(l) if l > 0.0 => PsdStatus::VerifiedPd,
            Ok(l) if l < 0.0 => PsdStatus::VerifiedNotPsd,
            _ => PsdStatus::Unchecked,
        }
    }
}

/// Post-processing applied to an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Adjustment {
    None,
    PositivePart,
    PatternPsd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationEstimate {
    pub matrix: SymMatrix,
    pub method: Method,
    pub n_used: usize,
    pub psd: PsdStatus,
    /// False only after an adjustment that fills in off-pattern entries.
    pub pattern_conforming: bool,
    pub adjustment: Adjustment,
}

/// Inverted clique and separator blocks of one set of statistics.
#[derive(Debug, Clone)]
pub struct BlockInverses<'a> {
    stats: &'a SufficientStats,
    cliques: Vec<SymMatrix>,
    separators: Vec<SymMatrix>,
}

impl<'a> BlockInverses<'a> {
    pub fn new(stats: &'a SufficientStats) -> Result<Self> {
        let invert = |blocks: &[SymMatrix], kind: BlockKind, offset: usize| -> Result<Vec<SymMatrix>> {
            blocks
                .iter()
                .enumerate()
                .map(|(k, b)| {
                    if b.dim() == 0 {
                        return Ok(SymMatrix::zeros(0));
                    }
                    b.inverse_spd().map_err(|_| Error::SingularBlock { kind, index: k + offset })
                })
                .collect()
        };
        Ok(BlockInverses {
            stats,
            cliques: invert(stats.clique_blocks(), BlockKind::Clique, 1)?,
            separators: invert(stats.sep_blocks(), BlockKind::Separator, 2)?,
        })
    }

    pub fn stats(&self) -> &SufficientStats {
        self.stats
    }

    /// `S_k^{-1}` in clique order.
    pub fn cliques(&self) -> &[SymMatrix] {
        &self.cliques
    }

    /// `S_[k]^{-1}` for `k = 2..K` (0 x 0 for empty separators).
    pub fn separators(&self) -> &[SymMatrix] {
        &self.separators
    }

    /// `Σ_k [α_k S_k^{-1}]^0 - Σ_k [β_k S_[k]^{-1}]^0`.
    pub fn clique_sum(&self, alpha: &[f64], beta: &[f64]) -> Result<SymMatrix> {
        let graph = self.stats.graph();
        if alpha.len() != self.cliques.len() || beta.len() != self.separators.len() {
            return Err(Error::DimensionMismatch(format!(
                "need {} clique and {} separator coefficients, got {} and {}",
                self.cliques.len(),
                self.separators.len(),
                alpha.len(),
                beta.len()
            )));
        }
        let mut out = SymMatrix::zeros(graph.p());
        for ((set, inv), &a) in graph.cliques().iter().zip(&self.cliques).zip(alpha) {
            out.accumulate_block(inv, set, a);
        }
        for ((set, inv), &b) in graph.separators().iter().zip(&self.separators).zip(beta) {
            out.accumulate_block(inv, set, -b);
        }
        Ok(out)
    }

    /// Coefficients `(n - c_k - 1 - shift, n - s_k - 1 - shift)`.
    fn unbiased_coefficients(&self, shift: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.stats.n() as f64;
        let graph = self.stats.graph();
        let alpha = graph.cliques().iter().map(|c| n - c.len() as f64 - 1.0 - shift).collect();
        let beta = graph.separators().iter().map(|s| n - s.len() as f64 - 1.0 - shift).collect();
        (alpha, beta)
    }

    /// `D = Σ_k [S_k^{-1}]^0 - Σ_k [S_[k]^{-1}]^0`, i.e. the MLE over n.
    pub fn d_matrix(&self) -> SymMatrix {
        let ones_c = vec![1.0; self.cliques.len()];
        let ones_s = vec![1.0; self.separators.len()];
        self.clique_sum(&ones_c, &ones_s).expect("coefficient lengths match")
    }

    pub fn mle_matrix(&self) -> SymMatrix {
        let n = self.stats.n() as f64;
        let a = vec![n; self.cliques.len()];
        let b = vec![n; self.separators.len()];
        self.clique_sum(&a, &b).expect("coefficient lengths match")
    }

    pub fn mvue_matrix(&self) -> SymMatrix {
        self.family_matrix(0.0)
    }

    /// `K̂_d` for an arbitrary `d`.
    pub fn family_matrix(&self, d: f64) -> SymMatrix {
        let (a, b) = self.unbiased_coefficients(d);
        self.clique_sum(&a, &b).expect("coefficient lengths match")
    }

    pub fn mle(&self) -> Result<ConcentrationEstimate> {
        require_samples(self.stats)?;
        Ok(ConcentrationEstimate {
            matrix: self.mle_matrix(),
            method: Method::Mle,
            n_used: self.stats.n(),
            // Positive definite whenever every clique block is.
            psd: PsdStatus::VerifiedPd,
            pattern_conforming: true,
            adjustment: Adjustment::None,
        })
    }

    pub fn mvue(&self) -> Result<ConcentrationEstimate> {
        require_samples(self.stats)?;
        let (n, p) = (self.stats.n(), self.stats.p());
        if n <= p + 1 {
            log::warn!("MVUE with n = {n} <= p + 1 = {} is not positive definite with probability one", p + 1);
        }
        Ok(checked(self.mvue_matrix(), Method::Mvue, n))
    }

    pub fn be(&self) -> Result<ConcentrationEstimate> {
        require_samples(self.stats)?;
        let trace = self.stats.diag_trace();
        if !(trace > 0.0) {
            return Err(Error::ZeroTrace);
        }
        let mut m = self.mvue_matrix();
        m.add_to_diagonal(-1.0 / trace);
        Ok(checked(m, Method::Be, self.stats.n()))
    }

    pub fn sure_tuned(&self) -> Result<ConcentrationEstimate> {
        require_samples(self.stats)?;
        let d = sure::DTuning::from_inverses(self).d;
        Ok(checked(self.family_matrix(d), Method::SureD { d }, self.stats.n()))
    }
}

fn require_samples(stats: &SufficientStats) -> Result<()> {
    let required = stats.graph().max_clique_size();
    if stats.n() < required {
        return Err(Error::TooFewSamples { n: stats.n(), required });
    }
    Ok(())
}

fn checked(matrix: SymMatrix, method: Method, n_used: usize) -> ConcentrationEstimate {
    ConcentrationEstimate {
        psd: PsdStatus::check(&matrix),
        matrix,
        method,
        n_used,
        pattern_conforming: true,
        adjustment: Adjustment::None,
    }
}

/// Checks the zero-trace precondition before any block is inverted, so
/// all-zero data reports `ZeroTrace` rather than a singular block.
fn inverses_for_be(stats: &SufficientStats) -> Result<BlockInverses<'_>> {
    if !(stats.diag_trace() > 0.0) {
        return Err(Error::ZeroTrace);
    }
    BlockInverses::new(stats)
}

pub fn clique_sum(stats: &SufficientStats, alpha: &[f64], beta: &[f64]) -> Result<SymMatrix> {
    BlockInverses::new(stats)?.clique_sum(alpha, beta)
}

pub fn mle(stats: &SufficientStats) -> Result<ConcentrationEstimate> {
    require_samples(stats)?;
    BlockInverses::new(stats)?.mle()
}

pub fn mvue(stats: &SufficientStats) -> Result<ConcentrationEstimate> {
    require_samples(stats)?;
    BlockInverses::new(stats)?.mvue()
}

pub fn be(stats: &SufficientStats) -> Result<ConcentrationEstimate> {
    require_samples(stats)?;
    inverses_for_be(stats)?.be()
}

pub fn sure_tuned(stats: &SufficientStats) -> Result<ConcentrationEstimate> {
    require_samples(stats)?;
    BlockInverses::new(stats)?.sure_tuned()
}

/// `max_k ‖[K̂^{-1}]_{C_k,C_k} - S_k / n‖_F`.
pub fn local_consistency_residual(est: &ConcentrationEstimate, stats: &SufficientStats) -> Result<f64> {
    let sigma = est.matrix.inverse_spd()?;
    let n = stats.n() as f64;
    let residual = stats
        .graph()
        .cliques()
        .iter()
        .zip(stats.clique_blocks())
        .map(|(c, s)| (&sigma.submatrix(c) - &(s * (1.0 / n))).frobenius_norm())
        .fold(0.0, f64::max);
    Ok(residual)
}
