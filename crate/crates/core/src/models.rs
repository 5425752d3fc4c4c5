//! Synthetic ground-truth concentration matrices and Gaussian sampling.
//!
//! Every structure is described by a [`ModelSpec`]. The `paper-*` presets
//! fix the dimension (p = 100 or 239); the other kinds scale with `p`.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DecomposableGraph;
use crate::linalg::SymMatrix;

/// Kind-specific structure parameters. Band widths count off-diagonals, so
/// band `L` gives cliques of `L + 1` consecutive nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelKind {
    /// Consecutive non-overlapping cliques of the given size (last may be smaller).
    BlockDiagonal { block: usize },
    /// `C_1 = {1..first}`, `C_2 = {first - overlap + 1..p}`.
    TwoCoupledBlocks { first: usize, overlap: usize },
    /// Cliques `{j..j+band}`.
    Banded { band: usize },
    /// `wide_cliques` cliques of bandwidth `wide_band`, then bandwidth
    /// `narrow_band` for the rest of the chain.
    DifferentialBanded {
        wide_band: usize,
        wide_cliques: usize,
        narrow_band: usize,
    },
    /// Hub nodes `{1..hub}` joined to every remaining node.
    Arrow { hub: usize },
    /// Binary tree: node `i` is the parent of `2i` and `2i + 1`.
    Multiscale,
    PaperTwoCliques,
    PaperBanded,
    PaperDiffband,
}

impl ModelKind {
    pub const NAMES: [&'static str; 9] = [
        "block-diagonal",
        "two-coupled-blocks",
        "banded",
        "differential-banded",
        "arrow",
        "multiscale",
        "paper-two-cliques",
        "paper-banded",
        "paper-diffband",
    ];

    /// Kind from its CLI name with desk-scale defaults for dimension `p`.
    /// `band` overrides the (wide) bandwidth for the banded kinds and the
    /// block size for `block-diagonal`.
    pub fn from_name(name: &str, p: usize, band: Option<usize>) -> Result<Self> {
        let scaled = |at_239: f64| ((at_239 * p as f64) / 239.0).round() as usize;
        Ok(match name {
            "block-diagonal" => ModelKind::BlockDiagonal {
                block: band.unwrap_or_else(|| p.div_ceil(4).max(2).min(p)),
            },
            "two-coupled-blocks" => {
                let first = (0.7 * p as f64).ceil() as usize;
                let overlap = ((0.1 * p as f64).round() as usize).max(1);
                ModelKind::TwoCoupledBlocks { first, overlap }
            }
            "banded" => ModelKind::Banded { band: band.unwrap_or(2) },
            "differential-banded" => {
                let narrow_band = scaled(4.0).max(1);
                let wide_band = band.unwrap_or_else(|| scaled(14.0)).max(narrow_band + 1);
                let wide_cliques = scaled(58.0).max(1);
                ModelKind::DifferentialBanded {
                    wide_band,
                    wide_cliques,
                    narrow_band,
                }
            }
            "arrow" => ModelKind::Arrow { hub: 1 },
            "multiscale" => ModelKind::Multiscale,
            "paper-two-cliques" => ModelKind::PaperTwoCliques,
            "paper-banded" => ModelKind::PaperBanded,
            "paper-diffband" => ModelKind::PaperDiffband,
            other => {
                return Err(Error::InvalidModel(format!(
                    "unknown model kind '{other}' (expected one of {})",
                    Self::NAMES.join(", ")
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::BlockDiagonal { .. } => "block-diagonal",
            ModelKind::TwoCoupledBlocks { .. } => "two-coupled-blocks",
            ModelKind::Banded { .. } => "banded",
            ModelKind::DifferentialBanded { .. } => "differential-banded",
            ModelKind::Arrow { .. } => "arrow",
            ModelKind::Multiscale => "multiscale",
            ModelKind::PaperTwoCliques => "paper-two-cliques",
            ModelKind::PaperBanded => "paper-banded",
            ModelKind::PaperDiffband => "paper-diffband",
        }
    }

    /// Dimension forced by the fixed-size presets.
    pub fn fixed_dimension(&self) -> Option<usize> {
        match self {
            ModelKind::PaperTwoCliques => Some(100),
            ModelKind::PaperBanded | ModelKind::PaperDiffband => Some(239),
            _ => None,
        }
    }
}

fn default_conditioning() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(flatten)]
    pub kind: ModelKind,
    pub p: usize,
    pub seed: u64,
    /// Minimum eigenvalue of the generated concentration matrix.
    #[serde(default = "default_conditioning")]
    pub conditioning: f64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, p: usize, seed: u64) -> Self {
        let p = kind.fixed_dimension().unwrap_or(p);
        ModelSpec {
            kind,
            p,
            seed,
            conditioning: default_conditioning(),
        }
    }

    pub fn banded(p: usize, band: usize, seed: u64) -> Self {
        Self::new(ModelKind::Banded { band }, p, seed)
    }

    /// Short label used in benchmark output, e.g. `banded(p=30,L=2)`.
    pub fn label(&self) -> String {
        match &self.kind {
            ModelKind::BlockDiagonal { block } => format!("block-diagonal(p={},b={block})", self.p),
            ModelKind::TwoCoupledBlocks { first, overlap } => {
                format!("two-coupled-blocks(p={},c1={first},s={overlap})", self.p)
            }
            ModelKind::Banded { band } => format!("banded(p={},L={band})", self.p),
            ModelKind::DifferentialBanded {
                wide_band,
                wide_cliques,
                narrow_band,
            } => format!(
                "differential-banded(p={},L={wide_band}x{wide_cliques},L={narrow_band})",
                self.p
            ),
            ModelKind::Arrow { hub } => format!("arrow(p={},h={hub})", self.p),
            other => format!("{}(p={})", other.name(), self.p),
        }
    }

    /// Maximal cliques (0-based) of the structure, before reordering.
    pub fn cliques(&self) -> Result<Vec<Vec<usize>>> {
        let p = self.p;
        if p == 0 {
            return Err(Error::InvalidModel("p must be positive".into()));
        }
        if let Some(fixed) = self.kind.fixed_dimension() {
            if p != fixed {
                return Err(Error::InvalidModel(format!("{} requires p = {fixed}, got {p}", self.kind.name())));
            }
        }
        let run = |start: usize, len: usize| (start..start + len).collect::<Vec<_>>();
        let cliques = match self.kind {
            ModelKind::BlockDiagonal { block } => {
                if block == 0 {
                    return Err(Error::InvalidModel("block size must be positive".into()));
                }
                (0..p).step_by(block).map(|s| run(s, block.min(p - s))).collect()
            }
            ModelKind::TwoCoupledBlocks { first, overlap } => two_blocks(p, first, overlap)?,
            ModelKind::PaperTwoCliques => two_blocks(p, 70, 10)?,
            ModelKind::Banded { band } => banded(p, band)?,
            ModelKind::PaperBanded => banded(p, 20)?,
            ModelKind::DifferentialBanded {
                wide_band,
                wide_cliques,
                narrow_band,
            } => differential_banded(p, wide_band, wide_cliques, narrow_band)?,
            ModelKind::PaperDiffband => differential_banded(p, 14, 58, 4)?,
            ModelKind::Arrow { hub } => {
                if hub == 0 || hub >= p {
                    return Err(Error::InvalidModel(format!("arrow hub size {hub} must lie in 1..{p}")));
                }
                (hub..p)
                    .map(|j| {
                        let mut c = run(0, hub);
                        c.push(j);
                        c
                    })
                    .collect()
            }
            ModelKind::Multiscale => {
                return Ok(DecomposableGraph::from_pattern(&tree_pattern(p))?.cliques().to_vec());
            }
        };
        Ok(cliques)
    }

    pub fn graph(&self) -> Result<DecomposableGraph> {
        if let ModelKind::Multiscale = self.kind {
            return DecomposableGraph::from_pattern(&tree_pattern(self.p));
        }
        DecomposableGraph::new(self.cliques()?, self.p)
    }
}

fn two_blocks(p: usize, first: usize, overlap: usize) -> Result<Vec<Vec<usize>>> {
    if first >= p || overlap == 0 || overlap >= first {
        return Err(Error::InvalidModel(format!(
            "two coupled blocks need 0 < overlap < first < p (first={first}, overlap={overlap}, p={p})"
        )));
    }
    Ok(vec![(0..first).collect(), (first - overlap..p).collect()])
}

fn banded(p: usize, band: usize) -> Result<Vec<Vec<usize>>> {
    if band + 1 > p {
        return Err(Error::InvalidModel(format!("band {band} needs p >= {}, got {p}", band + 1)));
    }
    Ok((0..p - band).map(|j| (j..=j + band).collect()).collect())
}

/// Wide cliques `{k..k+W}` for the first `m` starts, then narrow cliques
/// `{j..j+N}` starting at the first position not nested in the last wide
/// clique.
fn differential_banded(p: usize, wide: usize, m: usize, narrow: usize) -> Result<Vec<Vec<usize>>> {
    if wide <= narrow || m == 0 || m + wide > p {
        return Err(Error::InvalidModel(format!(
            "differential banding needs narrow < wide and wide_cliques + wide <= p \
             (wide={wide}, wide_cliques={m}, narrow={narrow}, p={p})"
        )));
    }
    let mut cliques: Vec<Vec<usize>> = (0..m).map(|k| (k..=k + wide).collect()).collect();
    let first_narrow = m + wide - narrow;
    if first_narrow + narrow < p {
        cliques.extend((first_narrow..p - narrow).map(|j| (j..=j + narrow).collect()));
    }
    Ok(cliques)
}

fn tree_pattern(p: usize) -> Vec<Vec<bool>> {
    let mut pat = vec![vec![false; p]; p];
    for (i, row) in pat.iter_mut().enumerate() {
        row[i] = true;
    }
    for child in 1..p {
        let parent = (child - 1) / 2;
        pat[parent][child] = true;
        pat[child][parent] = true;
    }
    pat
}

/// A graph and a positive definite concentration matrix with exactly its
/// sparsity pattern.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub label: String,
    pub graph: Arc<DecomposableGraph>,
    pub k_true: SymMatrix,
}

impl GroundTruth {
    pub fn p(&self) -> usize {
        self.graph.p()
    }

    pub fn sampler(&self) -> Result<GaussianSampler> {
        GaussianSampler::new(&self.k_true)
    }
}

/// Uniform(-1, 1) entries on the off-diagonal edges, then a diagonal shift
/// that puts the smallest eigenvalue at `spec.conditioning`.
pub fn make_model(spec: &ModelSpec) -> Result<GroundTruth> {
    if !(spec.conditioning > 0.0 && spec.conditioning.is_finite()) {
        return Err(Error::InvalidModel("conditioning must be positive and finite".into()));
    }
    let graph = spec.graph()?;
    let p = graph.p();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let unif = Uniform::new(-1.0, 1.0).expect("valid range");
    let mut k = SymMatrix::zeros(p);
    for (i, j) in graph.edges() {
        if i != j {
            k.set(i, j, rng.sample(unif));
        }
    }
    let lambda_min = k.min_eigenvalue()?;
    k.add_to_diagonal(lambda_min.abs() + spec.conditioning);
    Ok(GroundTruth {
        label: spec.label(),
        graph: Arc::new(graph),
        k_true: k,
    })
}

/// Draws zero-mean Gaussian rows with covariance `K^{-1}` via the Cholesky
/// factor of the covariance.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    factor_t: DMatrix<f64>,
}

impl GaussianSampler {
    pub fn new(k: &SymMatrix) -> Result<Self> {
        let sigma = k.inverse_spd()?;
        let chol = sigma.cholesky()?;
        Ok(GaussianSampler {
            factor_t: chol.l().transpose(),
        })
    }

    pub fn p(&self) -> usize {
        self.factor_t.nrows()
    }

    /// `n x p` data matrix.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> DMatrix<f64> {
        let p = self.p();
        let mut z = DMatrix::zeros(n, p);
        for i in 0..n {
            for j in 0..p {
                z[(i, j)] = rng.sample(StandardNormal);
            }
        }
        z * &self.factor_t
    }
}

pub fn sample_gaussian(truth: &GroundTruth, n: usize, seed: u64) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::InvalidConfig("n must be at least 1".into()));
    }
    let sampler = truth.sampler()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sampler.sample(n, &mut rng))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for a `(master seed, coordinates…)` tuple, e.g.
/// `(seed, n, trial)`. Results do not depend on which thread runs a trial.
pub fn substream(master: u64, coords: &[u64]) -> ChaCha8Rng {
    let mut h = splitmix64(master);
    for &c in coords {
        h = splitmix64(h ^ c);
    }
    ChaCha8Rng::seed_from_u64(h)
}
