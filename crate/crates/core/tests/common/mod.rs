//! Test-only oracles written independently of the library's linear algebra.

#![allow(dead_code)]

use std::sync::Arc;

use decomposable_ggm::{make_model, DecomposableGraph, ModelKind, ModelSpec, SufficientStats, SymMatrix};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type Dense = Vec<Vec<f64>>;

pub fn to_dense(m: &SymMatrix) -> Dense {
    let p = m.dim();
    (0..p).map(|i| (0..p).map(|j| m.get(i, j)).collect()).collect()
}

pub fn from_dense(d: &Dense) -> SymMatrix {
    SymMatrix::from_fn(d.len(), |i, j| 0.5 * (d[i][j] + d[j][i]))
}

/// Cyclic Jacobi eigensolver: `(eigenvalues, eigenvectors as columns)`.
pub fn jacobi_eigen(a: &Dense) -> (Vec<f64>, Dense) {
    let p = a.len();
    let mut a = a.clone();
    let mut v: Dense = (0..p).map(|i| (0..p).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..p)
            .flat_map(|i| (0..p).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let scale: f64 = (0..p).map(|i| a[i][i] * a[i][i]).sum::<f64>().max(1e-300);
        if off <= 1e-32 * scale {
            break;
        }
        for q in 1..p {
            for r in 0..q {
                if a[r][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[r][r]) / (2.0 * a[r][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..p {
                    let (akr, akq) = (a[k][r], a[k][q]);
                    a[k][r] = c * akr - s * akq;
                    a[k][q] = s * akr + c * akq;
                }
                for k in 0..p {
                    let (ark, aqk) = (a[r][k], a[q][k]);
                    a[r][k] = c * ark - s * aqk;
                    a[q][k] = s * ark + c * aqk;
                }
                for k in 0..p {
                    let (vkr, vkq) = (v[k][r], v[k][q]);
                    v[k][r] = c * vkr - s * vkq;
                    v[k][q] = s * vkr + c * vkq;
                }
            }
        }
    }
    ((0..p).map(|i| a[i][i]).collect(), v)
}

/// `V diag(values) V^T`.
pub fn reassemble(values: &[f64], v: &Dense) -> Dense {
    let p = values.len();
    (0..p)
        .map(|i| (0..p).map(|j| (0..p).map(|k| v[i][k] * values[k] * v[j][k]).sum()).collect())
        .collect()
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn gauss_jordan_inverse(a: &Dense) -> Dense {
    let p = a.len();
    let mut m: Dense = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..p).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..p {
        let pivot = (col..p)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        let d = m[col][col];
        assert!(d != 0.0, "singular matrix");
        for x in m[col].iter_mut() {
            *x /= d;
        }
        for row in 0..p {
            if row != col {
                let f = m[row][col];
                if f != 0.0 {
                    for k in 0..2 * p {
                        m[row][k] -= f * m[col][k];
                    }
                }
            }
        }
    }
    m.into_iter().map(|r| r[p..].to_vec()).collect()
}

pub fn dense_sub(a: &Dense, idx: &[usize]) -> Dense {
    idx.iter().map(|&i| idx.iter().map(|&j| a[i][j]).collect()).collect()
}

pub fn trace(a: &Dense) -> f64 {
    (0..a.len()).map(|i| a[i][i]).sum()
}

pub fn frob_sq(a: &Dense) -> f64 {
    a.iter().flatten().map(|x| x * x).sum()
}

/// Random SPD matrix `A A^T + eps I` with Gaussian `A`.
pub fn random_spd(p: usize, rng: &mut impl Rng) -> SymMatrix {
    let a = DMatrix::<f64>::from_fn(p, p, |_, _| rng.sample(StandardNormal));
    let m = &a * a.transpose() + DMatrix::identity(p, p) * 0.1;
    SymMatrix::symmetrize(&m).unwrap()
}

pub fn random_symmetric(p: usize, rng: &mut impl Rng) -> SymMatrix {
    SymMatrix::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub const MIXED_KINDS: [&str; 6] = [
    "banded",
    "arrow",
    "block-diagonal",
    "two-coupled-blocks",
    "multiscale",
    "differential-banded",
];

/// Model of a random kind with `4 <= p <= p_max`.
pub fn random_spec(rng: &mut impl Rng, p_max: usize) -> ModelSpec {
    let p = rng.random_range(4..=p_max);
    let name = MIXED_KINDS[rng.random_range(0..MIXED_KINDS.len())];
    let band = match name {
        "banded" => Some(rng.random_range(1..=3.min(p - 1))),
        _ => None,
    };
    let kind = ModelKind::from_name(name, p, band).unwrap();
    ModelSpec::new(kind, p, rng.random())
}

/// Statistics from Gaussian data on a random model, with
/// `max c_k <= n <= max c_k + extra`.
pub fn random_stats(rng: &mut impl Rng, p_max: usize, extra: usize) -> SufficientStats {
    let spec = random_spec(rng, p_max);
    let truth = make_model(&spec).unwrap();
    let cmax = truth.graph.max_clique_size();
    let n = cmax + rng.random_range(0..=extra);
    let data = truth.sampler().unwrap().sample(n, rng);
    SufficientStats::from_data(&data, truth.graph).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn tridiagonal(p: usize) -> Arc<DecomposableGraph> {
    Arc::new(DecomposableGraph::new((0..p - 1).map(|i| vec![i, i + 1]).collect(), p).unwrap())
}
