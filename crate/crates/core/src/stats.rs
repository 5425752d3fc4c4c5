//! Sufficient statistics, Wishart and hyper-Wishart log-densities, and the
//! conditional covariance diagnostic.

use std::f64::consts::{LN_2, PI};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::graph::DecomposableGraph;
use crate::linalg::SymMatrix;

/// Clique and separator blocks of the unnormalized scatter
/// `S̄ = Σ_i x[i] x[i]^T`.
///
/// Entries of `S̄` outside the edge set are never formed. Every entry shared
/// by several blocks is computed by the same dot product, so overlapping
/// blocks agree bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    n: usize,
    graph: Arc<DecomposableGraph>,
    clique_blocks: Vec<SymMatrix>,
    sep_blocks: Vec<SymMatrix>,
    diag_trace: f64,
}

impl SufficientStats {
    /// Statistics of an `n x p` data matrix (one observation per row).
    pub fn from_data(data: &DMatrix<f64>, graph: Arc<DecomposableGraph>) -> Result<Self> {
        let (n, p) = data.shape();
        if p != graph.p() {
            return Err(Error::DimensionMismatch(format!(
                "data has {p} columns, graph has {} nodes",
                graph.p()
            )));
        }
        if n == 0 {
            return Err(Error::TooFewSamples { n, required: 1 });
        }
        for j in 0..p {
            for i in 0..n {
                if !data[(i, j)].is_finite() {
                    return Err(Error::NonFinite { row: i + 1, col: j + 1 });
                }
            }
        }
        let entry = |a: usize, b: usize| data.column(a).dot(&data.column(b));
        let block = |idx: &[usize]| SymMatrix::from_fn(idx.len(), |x, y| entry(idx[x], idx[y]));
        let clique_blocks = graph.cliques().iter().map(|c| block(c)).collect();
        let sep_blocks = graph.separators().iter().map(|s| block(s)).collect();
        let diag_trace = (0..p).map(|i| entry(i, i)).sum();
        Ok(SufficientStats {
            n,
            graph,
            clique_blocks,
            sep_blocks,
            diag_trace,
        })
    }

    /// Statistics read off a full scatter matrix `S̄` for `n` samples.
    pub fn from_scatter(n: usize, scatter: &SymMatrix, graph: Arc<DecomposableGraph>) -> Result<Self> {
        if scatter.dim() != graph.p() {
            return Err(Error::DimensionMismatch(format!(
                "scatter is {}x{}, graph has {} nodes",
                scatter.dim(),
                scatter.dim(),
                graph.p()
            )));
        }
        if n == 0 {
            return Err(Error::TooFewSamples { n, required: 1 });
        }
        if !scatter.is_finite() {
            return Err(Error::NonFinite { row: 0, col: 0 });
        }
        let clique_blocks = graph.cliques().iter().map(|c| scatter.submatrix(c)).collect();
        let sep_blocks = graph.separators().iter().map(|s| scatter.submatrix(s)).collect();
        Ok(SufficientStats {
            n,
            clique_blocks,
            sep_blocks,
            diag_trace: scatter.trace(),
            graph,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn graph(&self) -> &Arc<DecomposableGraph> {
        &self.graph
    }

    pub fn p(&self) -> usize {
        self.graph.p()
    }

    /// `S_k = [S̄]_{C_k, C_k}`, in clique order.
    pub fn clique_blocks(&self) -> &[SymMatrix] {
        &self.clique_blocks
    }

    /// `S_[k] = [S̄]_{S_k, S_k}` for `k = 2..K`.
    pub fn sep_blocks(&self) -> &[SymMatrix] {
        &self.sep_blocks
    }

    /// `Tr(S̄)`.
    pub fn diag_trace(&self) -> f64 {
        self.diag_trace
    }

    /// Pooled statistics of two independent samples on the same graph.
    pub fn merge(&self, other: &SufficientStats) -> Result<SufficientStats> {
        if self.graph != other.graph {
            return Err(Error::DimensionMismatch("statistics come from different graphs".into()));
        }
        let add = |a: &[SymMatrix], b: &[SymMatrix]| a.iter().zip(b).map(|(x, y)| x + y).collect();
        Ok(SufficientStats {
            n: self.n + other.n,
            graph: Arc::clone(&self.graph),
            clique_blocks: add(&self.clique_blocks, &other.clique_blocks),
            sep_blocks: add(&self.sep_blocks, &other.sep_blocks),
            diag_trace: self.diag_trace + other.diag_trace,
        })
    }

    /// Value of the edge entry `(i, j)` of the incomplete statistic.
    pub fn entry(&self, i: usize, j: usize) -> Option<f64> {
        if !self.graph.has_edge(i, j) {
            return None;
        }
        self.graph.cliques().iter().zip(&self.clique_blocks).find_map(|(c, b)| {
            let a = c.binary_search(&i).ok()?;
            let bb = c.binary_search(&j).ok()?;
            Some(b.get(a, bb))
        })
    }

    /// Copy with the edge entry `(i, j)` (and `(j, i)`) shifted by `delta` in
    /// every block that contains it.
    pub fn perturbed(&self, i: usize, j: usize, delta: f64) -> Result<SufficientStats> {
        if !self.graph.has_edge(i, j) {
            return Err(Error::PatternViolation { row: i + 1, col: j + 1 });
        }
        let mut out = self.clone();
        let shift = |sets: &[Vec<usize>], blocks: &mut [SymMatrix]| {
            for (set, block) in sets.iter().zip(blocks.iter_mut()) {
                if let (Ok(a), Ok(b)) = (set.binary_search(&i), set.binary_search(&j)) {
                    block.set(a, b, block.get(a, b) + delta);
                }
            }
        };
        shift(self.graph.cliques(), &mut out.clique_blocks);
        shift(self.graph.separators(), &mut out.sep_blocks);
        if i == j {
            out.diag_trace += delta;
        }
        Ok(out)
    }

    /// Edge entries of `S̄` assembled into a `p x p` matrix with zeros off
    /// the pattern.
    pub fn assemble(&self) -> SymMatrix {
        let p = self.p();
        let mut out = SymMatrix::zeros(p);
        for (c, b) in self.graph.cliques().iter().zip(&self.clique_blocks) {
            for (x, &i) in c.iter().enumerate() {
                for (y, &j) in c.iter().enumerate().skip(x) {
                    out.set(i, j, b.get(x, y));
                }
            }
        }
        out
    }
}

/// `ln Γ_p(a) = p(p-1)/4 ln π + Σ_{j=1..p} ln Γ(a + (1 - j)/2)`.
pub fn ln_multivariate_gamma(p: usize, a: f64) -> f64 {
    let pf = p as f64;
    pf * (pf - 1.0) / 4.0 * PI.ln() + (1..=p).map(|j| ln_gamma(a + (1.0 - j as f64) / 2.0)).sum::<f64>()
}

/// Log-density of a `p`-dimensional Wishart scatter `s` with `n` degrees of
/// freedom and natural parameter (concentration) `k`.
pub fn wishart_logpdf(s: &SymMatrix, n: usize, k: &SymMatrix) -> Result<f64> {
    let p = s.dim();
    if k.dim() != p {
        return Err(Error::DimensionMismatch(format!("scatter is {p}x{p}, parameter is {}x{}", k.dim(), k.dim())));
    }
    if n < p {
        return Err(Error::TooFewSamples { n, required: p });
    }
    let nf = n as f64;
    let pf = p as f64;
    let ln_det_s = ln_det_spd(s)?;
    let ln_det_k = ln_det_spd(k)?;
    Ok((nf - pf - 1.0) / 2.0 * ln_det_s + nf / 2.0 * ln_det_k
        - nf * pf / 2.0 * LN_2
        - ln_multivariate_gamma(p, nf / 2.0)
        - 0.5 * k.trace_product(s))
}

fn ln_det_spd(m: &SymMatrix) -> Result<f64> {
    let chol = m.cholesky()?;
    Ok(2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// Hyper-Wishart log-density of the clique/separator blocks: a sum of clique
/// Wishart log-densities minus the separator ones, each with parameter
/// `([K^{-1}]_{A,A})^{-1}` for its index set `A`.
pub fn hyper_wishart_logpdf(stats: &SufficientStats, k: &SymMatrix) -> Result<f64> {
    let graph = stats.graph();
    graph.check_pattern(k)?;
    let required = graph.max_clique_size();
    if stats.n() < required {
        return Err(Error::TooFewSamples { n: stats.n(), required });
    }
    let sigma = k.inverse_spd()?;
    let marginal = |set: &[usize], block: &SymMatrix| -> Result<f64> {
        let param = sigma.submatrix(set).inverse_spd()?;
        wishart_logpdf(block, stats.n(), &param)
    };
    let mut total = 0.0;
    for (c, b) in graph.cliques().iter().zip(stats.clique_blocks()) {
        total += marginal(c, b)?;
    }
    for (s, b) in graph.separators().iter().zip(stats.sep_blocks()) {
        if !s.is_empty() {
            total -= marginal(s, b)?;
        }
    }
    Ok(total)
}

/// Covariance of nodes `i` and `j` conditional on all other nodes:
/// `Σ_ij - Σ_{i,rest} Σ_{rest,rest}^{-1} Σ_{rest,j}`.
pub fn conditional_cov(sigma: &SymMatrix, i: usize, j: usize) -> Result<f64> {
    let p = sigma.dim();
    if i >= p || j >= p {
        return Err(Error::BadIndex { index: i.max(j) + 1, p });
    }
    if i == j {
        return Err(Error::InvalidConfig("conditional covariance needs two distinct nodes".into()));
    }
    sigma.cholesky()?;
    let rest: Vec<usize> = (0..p).filter(|&k| k != i && k != j).collect();
    if rest.is_empty() {
        return Ok(sigma.get(i, j));
    }
    let chol = sigma.submatrix(&rest).cholesky()?;
    let cross_j = DVector::from_iterator(rest.len(), rest.iter().map(|&r| sigma.get(r, j)));
    let cross_i = DVector::from_iterator(rest.len(), rest.iter().map(|&r| sigma.get(i, r)));
    let solved = chol.solve(&cross_j);
    Ok(sigma.get(i, j) - cross_i.dot(&solved))
}
